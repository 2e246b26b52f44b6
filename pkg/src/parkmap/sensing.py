"""Measurement synthesis for the platform and for connected external sources."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .environment import (
    World,
    _check_position,
    attenuation,
    cell_index,
    traffic_at,
    traffic_profile,
    true_pam,
)

PLATFORM = "platform"
EXTERNAL = "external"

MODES = ("gaussian", "indicator")


@dataclass(frozen=True)
class NoiseConfig:
    """Observation noise: additive sigma for gaussian mode, per-slot flip
    probabilities for indicator mode."""

    sigma: float = 3e-2
    p0: float = 0.05
    p1: float = 0.05
    mode: str = "gaussian"

    def __post_init__(self) -> None:
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if not (0.0 <= self.p0 <= 1.0 and 0.0 <= self.p1 <= 1.0):
            raise ValueError("p0 and p1 must lie in [0, 1]")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")


@dataclass(frozen=True)
class Measurement:
    """One availability reading, tagged with the traffic level it was taken
    under so it can later be recognized as obsolete."""

    position_m: float
    value: float
    traffic_tag: float
    timestamp_s: float
    origin: str


def observe_gaussian(
    x: float,
    world: World,
    rng: np.random.Generator,
    noise: NoiseConfig,
    t: float,
    origin: str = PLATFORM,
) -> Measurement:
    """Additive-Gaussian reading of the true availability at x.

    The value is deliberately not clamped to [0, 1]; the regression model sees
    the raw noisy number.
    """
    _check_position(x, world.cfg.length_m)
    value = true_pam(world.layout, world.traffic, x, world.cfg) + rng.normal(0.0, noise.sigma)
    return Measurement(
        position_m=float(x),
        value=float(value),
        traffic_tag=traffic_at(world.traffic, x),
        timestamp_s=float(t),
        origin=origin,
    )


def cell_availability(world: World, seed: int = 0) -> np.ndarray:
    """Free/occupied state per cell, stable for a (layout, traffic version, seed).

    A present slot is free iff its dedicated uniform draw falls below the local
    attenuation, so the expected free fraction matches the true map.
    """
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(world.traffic.version)]))
    cfg = world.cfg
    centers = (np.arange(cfg.n_cells) + 0.5) * cfg.slot_length_m
    lam = attenuation(traffic_profile(world.traffic, np.minimum(centers, cfg.length_m)))
    return world.layout.present & (rng.random(cfg.n_cells) < lam)


def observe_indicator(
    x: float,
    world: World,
    rng: np.random.Generator,
    noise: NoiseConfig,
    t: float,
    availability_seed: int = 0,
    origin: str = PLATFORM,
) -> Measurement:
    """Per-slot indicator reading over the trailing window.

    Each free slot is missed with probability p1; each occupied or absent slot
    is hallucinated free with probability p0. The reading is the noisy free
    count normalized by the window capacity.
    """
    _check_position(x, world.cfg.length_m)
    cfg = world.cfg
    m = cfg.cells_per_window
    hi = cell_index(x, cfg)
    lo = max(hi - m + 1, 0)
    free = cell_availability(world, availability_seed)[lo : hi + 1]
    n_free = int(free.sum())
    n_rest = m - n_free
    detected = n_free - int(np.sum(rng.random(n_free) < noise.p1))
    ghosts = int(np.sum(rng.random(n_rest) < noise.p0))
    return Measurement(
        position_m=float(x),
        value=(detected + ghosts) / m,
        traffic_tag=traffic_at(world.traffic, x),
        timestamp_s=float(t),
        origin=origin,
    )


def observe(
    x: float,
    world: World,
    rng: np.random.Generator,
    noise: NoiseConfig,
    t: float,
    availability_seed: int = 0,
    origin: str = PLATFORM,
) -> Measurement:
    """Dispatch on the configured observation mode."""
    if noise.mode == "indicator":
        return observe_indicator(x, world, rng, noise, t, availability_seed, origin)
    return observe_gaussian(x, world, rng, noise, t, origin)


def generate_sources(
    rng: np.random.Generator,
    world: World,
    t: float,
    max_sources: int,
    noise: NoiseConfig,
) -> list[Measurement]:
    """Readings from the external sources in range at time t.

    The source count is integer-uniform on {0, ..., max_sources} and positions
    are uniform over the road; source values always follow the gaussian model.
    """
    if max_sources < 0:
        raise ValueError("max_sources must be >= 0")
    n = int(rng.integers(0, max_sources + 1))
    xs = rng.uniform(0.0, world.cfg.length_m, n)
    return [observe_gaussian(float(x), world, rng, noise, t, origin=EXTERNAL) for x in xs]
