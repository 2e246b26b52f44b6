"""Synthetic road world: slot layout, traffic density, and the true availability map.

The world is one-dimensional. A road of length L carries parking slots of
uniform length D; availability at a point is the fraction of slots present in
the trailing window of W meters, attenuated by the local traffic density.
Traffic is piecewise constant in space and may be redrawn segment by segment
over time, which is what makes previously collected samples go stale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

KMH_TO_MS = 1000.0 / 3600.0
FREE_FLOW_SPEED_KMH = 90.0
ATTENUATION_GAIN = 20.0


@dataclass(frozen=True)
class RoadConfig:
    """Static geometry and dynamics parameters of the synthetic road."""

    length_m: float = 10_000.0
    slot_length_m: float = 5.0
    window_m: float = 100.0
    sample_period_s: float = 10.0
    segment_length_m: float = 1_000.0
    p_change: float = 0.2

    def __post_init__(self) -> None:
        if not self.length_m > self.window_m > self.slot_length_m > 0:
            raise ValueError("expected length_m > window_m > slot_length_m > 0")
        if self.sample_period_s <= 0:
            raise ValueError("sample_period_s must be > 0")
        if not 0.0 <= self.p_change <= 1.0:
            raise ValueError("p_change must lie in [0, 1]")
        n_seg = self.length_m / self.segment_length_m
        if round(n_seg) < 1 or abs(n_seg - round(n_seg)) > 1e-9:
            raise ValueError("length_m must split into whole segments")

    @property
    def n_cells(self) -> int:
        return int(math.floor(self.length_m / self.slot_length_m + 1e-9))

    @property
    def cells_per_window(self) -> int:
        return int(math.floor(self.window_m / self.slot_length_m + 1e-9))

    @property
    def n_segments(self) -> int:
        return int(round(self.length_m / self.segment_length_m))


@dataclass(frozen=True)
class SlotLayout:
    """Slot presence flag per D-length cell over [0, L]. Immutable."""

    present: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.present, dtype=bool)
        arr.setflags(write=False)
        object.__setattr__(self, "present", arr)

    @property
    def n_cells(self) -> int:
        return int(self.present.size)


@dataclass(frozen=True)
class TrafficDensity:
    """Piecewise-constant congestion level over the road.

    ``version`` increments exactly when a segment value is redrawn; stored
    measurements compare their collection-time tag against the live value to
    detect staleness.
    """

    segment_values: np.ndarray
    segment_length_m: float
    version: int = 0

    def __post_init__(self) -> None:
        arr = np.array(self.segment_values, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "segment_values", arr)

    @property
    def n_segments(self) -> int:
        return int(self.segment_values.size)

    @property
    def length_m(self) -> float:
        return float(self.segment_values.size * self.segment_length_m)


@dataclass(frozen=True)
class World:
    """Bundles everything needed to evaluate the true map at one instant."""

    cfg: RoadConfig
    layout: SlotLayout
    traffic: TrafficDensity


def generate_layout(rng: np.random.Generator, cfg: RoadConfig) -> SlotLayout:
    """Draw each cell's slot presence as an independent fair coin."""
    return SlotLayout(present=rng.random(cfg.n_cells) < 0.5)


def generate_traffic(rng: np.random.Generator, cfg: RoadConfig) -> TrafficDensity:
    """Draw one uniform density value per segment."""
    return TrafficDensity(
        segment_values=rng.uniform(0.0, 1.0, cfg.n_segments),
        segment_length_m=cfg.segment_length_m,
        version=0,
    )


def evolve_traffic(
    traffic: TrafficDensity, rng: np.random.Generator, cfg: RoadConfig
) -> TrafficDensity:
    """With probability p_change, redraw one uniformly chosen segment.

    Returns the input unchanged otherwise. The gate draw happens on every call
    so seeded streams stay aligned whether or not a change fires.
    """
    if rng.random() >= cfg.p_change:
        return traffic
    k = int(rng.integers(traffic.n_segments))
    values = traffic.segment_values.copy()
    values[k] = rng.uniform()
    return TrafficDensity(values, traffic.segment_length_m, traffic.version + 1)


def _check_position(x: float, length_m: float) -> None:
    if not np.isfinite(x) or x < 0.0 or x > length_m:
        raise ValueError(f"position {x!r} outside road [0, {length_m}]")


def cell_index(x: float, cfg: RoadConfig) -> int:
    """Cell containing x. Cells are right-open; the last cell absorbs x = L."""
    return min(int(x // cfg.slot_length_m), cfg.n_cells - 1)


def prior_availability(layout: SlotLayout, x: float, cfg: RoadConfig) -> float:
    """Fraction of the trailing window's cells that hold a parking slot.

    The window covers the cell containing x plus the preceding cells up to W
    meters back; cells extending below the road start count as absent.
    """
    _check_position(x, cfg.length_m)
    m = cfg.cells_per_window
    hi = cell_index(x, cfg)
    lo = max(hi - m + 1, 0)
    return float(layout.present[lo : hi + 1].sum()) / m


def prior_availability_profile(
    layout: SlotLayout, xs: np.ndarray, cfg: RoadConfig
) -> np.ndarray:
    """Vectorized prior_availability over an array of positions."""
    xs = np.asarray(xs, dtype=float)
    if xs.size and (not np.all(np.isfinite(xs)) or xs.min() < 0 or xs.max() > cfg.length_m):
        raise ValueError("positions outside road")
    m = cfg.cells_per_window
    hi = np.minimum((xs // cfg.slot_length_m).astype(int), cfg.n_cells - 1)
    lo = np.maximum(hi - m + 1, 0)
    csum = np.concatenate(([0], np.cumsum(layout.present)))
    return (csum[hi + 1] - csum[lo]) / m


def segment_index(traffic: TrafficDensity, x: float) -> int:
    """Segment containing x; right-open, with x = L folded into the last one."""
    return min(int(x // traffic.segment_length_m), traffic.n_segments - 1)


def traffic_at(traffic: TrafficDensity, x: float) -> float:
    """Density of the segment containing x."""
    _check_position(x, traffic.length_m)
    return float(traffic.segment_values[segment_index(traffic, x)])


def traffic_profile(traffic: TrafficDensity, xs: np.ndarray) -> np.ndarray:
    """Vectorized traffic_at over an array of positions."""
    xs = np.asarray(xs, dtype=float)
    if xs.size and (not np.all(np.isfinite(xs)) or xs.min() < 0 or xs.max() > traffic.length_m):
        raise ValueError("positions outside road")
    idx = np.minimum((xs // traffic.segment_length_m).astype(int), traffic.n_segments - 1)
    return traffic.segment_values[idx]


def _check_density(mu: np.ndarray) -> None:
    if not np.all(np.isfinite(mu)) or np.any(mu < 0.0) or np.any(mu > 1.0):
        raise ValueError("traffic density must lie in [0, 1]")


def attenuation(mu):
    """Logistic availability attenuation: near 1 in free flow, near 0 in jams."""
    arr = np.asarray(mu, dtype=float)
    _check_density(arr)
    out = 1.0 / (1.0 + np.exp(ATTENUATION_GAIN * (arr - 0.5)))
    return out.item() if out.ndim == 0 else out


def velocity(mu):
    """Platform speed in m/s, decaying exponentially with congestion."""
    arr = np.asarray(mu, dtype=float)
    _check_density(arr)
    out = FREE_FLOW_SPEED_KMH * KMH_TO_MS * np.exp(-arr)
    return out.item() if out.ndim == 0 else out


def true_pam(
    layout: SlotLayout, traffic: TrafficDensity, x: float, cfg: RoadConfig
) -> float:
    """Ground-truth availability: structural prior times traffic attenuation."""
    return prior_availability(layout, x, cfg) * attenuation(traffic_at(traffic, x))


def true_pam_profile(
    layout: SlotLayout, traffic: TrafficDensity, xs: np.ndarray, cfg: RoadConfig
) -> np.ndarray:
    """Vectorized true_pam over an array of positions."""
    pi = prior_availability_profile(layout, xs, cfg)
    return pi * attenuation(traffic_profile(traffic, xs))


# Serialization for replay. Field names here are the on-disk contract used by
# the CLI's world.json artifact.

def layout_to_dict(layout: SlotLayout) -> dict:
    return {"cells": [int(v) for v in layout.present]}


def layout_from_dict(data: dict) -> SlotLayout:
    return SlotLayout(present=np.asarray(data["cells"], dtype=bool))


def traffic_to_dict(traffic: TrafficDensity) -> dict:
    return {
        "segment_values": [float(v) for v in traffic.segment_values],
        "segment_length_m": float(traffic.segment_length_m),
        "version": int(traffic.version),
    }


def traffic_from_dict(data: dict) -> TrafficDensity:
    return TrafficDensity(
        segment_values=np.asarray(data["segment_values"], dtype=float),
        segment_length_m=float(data["segment_length_m"]),
        version=int(data["version"]),
    )


def road_config_to_dict(cfg: RoadConfig) -> dict:
    return {
        "length_m": cfg.length_m,
        "slot_length_m": cfg.slot_length_m,
        "window_m": cfg.window_m,
        "sample_period_s": cfg.sample_period_s,
        "segment_length_m": cfg.segment_length_m,
        "p_change": cfg.p_change,
    }


def road_config_from_dict(data: dict) -> RoadConfig:
    return RoadConfig(**data)
