"""The online mapping loop: evict stale data, measure, select, refit, advance.

One episode drives the platform from position 0 to the end of the road. Every
iteration refreshes traffic knowledge, drops measurements whose traffic tag no
longer matches, takes a platform reading, collects external-source readings,
applies the selection strategy, refits the regression model, and moves the
platform at the local traffic-dependent speed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .environment import (
    RoadConfig,
    SlotLayout,
    TrafficDensity,
    World,
    evolve_traffic,
    generate_layout,
    generate_traffic,
    traffic_at,
    traffic_profile,
    true_pam_profile,
    velocity,
)
from .gp import GpHyperparams, GpModel, fit, optimize_hyperparameters, posterior
from .metrics import MetricsRecord, prediction_grid, rmse_from_values
from .selection import STRATEGIES, CandidateSet, select
from .sensing import Measurement, NoiseConfig, generate_sources, observe

# Tags are exact copies of segment values, so any real change exceeds this.
OBSOLETE_TOL = 1e-9

# Fixed model initialization shared by every strategy arm; it defines the
# pre-data RMSE that learning curves are normalized by.
INITIAL_HYPERPARAMS = GpHyperparams(
    lengthscale_m=500.0, signal_variance=0.25, noise_variance=9e-4
)


@dataclass
class Dataset:
    """The growing and shrinking training set."""

    entries: list[Measurement] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    def positions(self) -> np.ndarray:
        return np.array([m.position_m for m in self.entries])

    def values(self) -> np.ndarray:
        return np.array([m.value for m in self.entries])

    def without(self, indices: list[int]) -> "Dataset":
        drop = set(indices)
        return Dataset([m for i, m in enumerate(self.entries) if i not in drop])

    def extended(self, new: list[Measurement]) -> "Dataset":
        return Dataset(self.entries + list(new))


@dataclass(frozen=True)
class EpisodeRngs:
    """Independent streams per concern, so strategy arms sharing a seed see
    identical worlds and measurement noise regardless of what they keep."""

    layout: np.random.Generator
    traffic: np.random.Generator
    platform: np.random.Generator
    sources: np.random.Generator
    selection: np.random.Generator

    @classmethod
    def from_seed(cls, seed: int) -> "EpisodeRngs":
        kids = np.random.SeedSequence(seed).spawn(5)
        return cls(*(np.random.default_rng(k) for k in kids))


@dataclass
class SimState:
    """Loop state after some number of iterations."""

    position_m: float
    clock_s: float
    dataset: Dataset
    model: GpModel
    traffic: TrafficDensity
    layout: SlotLayout
    strategy: str
    time_varying: bool


@dataclass(frozen=True)
class StepOutcome:
    state: SimState
    fit_predict_seconds: float
    evicted: int
    grid_mean: np.ndarray
    grid_variance: np.ndarray


@dataclass(frozen=True)
class EpisodeResult:
    records: list[MetricsRecord]
    rmse0: float
    final_state: SimState


def detect_obsolete(
    dataset: Dataset, traffic: TrafficDensity, tol: float = OBSOLETE_TOL
) -> list[int]:
    """Indices of entries whose stored traffic tag no longer matches the live
    density at their position."""
    if not dataset.entries:
        return []
    live = traffic_profile(traffic, dataset.positions())
    tags = np.array([m.traffic_tag for m in dataset.entries])
    return np.flatnonzero(np.abs(live - tags) > tol).tolist()


def step(
    state: SimState,
    rngs: EpisodeRngs,
    cfg: RoadConfig,
    noise: NoiseConfig,
    grid_xs: np.ndarray,
    max_sources: int = 10,
) -> StepOutcome:
    """Advance the loop by one sampling period.

    Order matters: traffic refresh, eviction, platform measurement, source
    collection, selection, refit, motion. The timing covers hyperparameter
    search, the final fit, and a full-grid posterior query. On a numerical
    failure in the refit the exception propagates and the caller's state is
    untouched.
    """
    if state.position_m > cfg.length_m:
        raise ValueError("platform is already past the end of the road")
    traffic = state.traffic
    if state.time_varying:
        traffic = evolve_traffic(traffic, rngs.traffic, cfg)

    dataset = state.dataset
    stale = detect_obsolete(dataset, traffic)
    if stale:
        dataset = dataset.without(stale)

    world = World(cfg, state.layout, traffic)
    t = state.clock_s
    platform_meas = observe(state.position_m, world, rngs.platform, noise, t)
    if state.strategy == "platform_only":
        candidates = CandidateSet((platform_meas,))
    else:
        sources = generate_sources(rngs.sources, world, t, max_sources, noise)
        candidates = CandidateSet((platform_meas, *sources))

    chosen = select(state.model, candidates, state.strategy, rngs.selection)
    dataset = dataset.extended(chosen)

    t0 = time.perf_counter()
    hyper = optimize_hyperparameters(dataset.positions(), dataset.values(), state.model.hyper)
    model = fit(dataset.positions(), dataset.values(), hyper)
    post = posterior(model, grid_xs)
    elapsed = time.perf_counter() - t0

    speed = velocity(traffic_at(traffic, state.position_m))
    new_state = replace(
        state,
        position_m=state.position_m + speed * cfg.sample_period_s,
        clock_s=state.clock_s + cfg.sample_period_s,
        dataset=dataset,
        model=model,
        traffic=traffic,
    )
    return StepOutcome(new_state, elapsed, len(stale), post.mean, post.variance)


def _init_episode(
    cfg: RoadConfig,
    strategy: str,
    seed: int,
    time_varying: bool,
    grid_step_m: float,
    init_hyper: GpHyperparams,
) -> tuple[SimState, EpisodeRngs, np.ndarray, float]:
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    rngs = EpisodeRngs.from_seed(seed)
    layout = generate_layout(rngs.layout, cfg)
    traffic = generate_traffic(rngs.traffic, cfg)
    model = fit(np.empty(0), np.empty(0), init_hyper)
    grid = prediction_grid(cfg, grid_step_m)
    # Pre-data estimate is the clamped zero prior mean.
    truth = true_pam_profile(layout, traffic, grid, cfg)
    rmse0 = rmse_from_values(np.zeros_like(grid), truth)
    state = SimState(
        position_m=0.0,
        clock_s=0.0,
        dataset=Dataset(),
        model=model,
        traffic=traffic,
        layout=layout,
        strategy=strategy,
        time_varying=time_varying,
    )
    return state, rngs, grid, rmse0


def run_episode(
    cfg: RoadConfig,
    noise: NoiseConfig,
    strategy: str,
    seed: int,
    time_varying: bool,
    grid_step_m: float = 10.0,
    max_sources: int = 10,
    init_hyper: GpHyperparams = INITIAL_HYPERPARAMS,
) -> EpisodeResult:
    """Run one full traversal and return per-iteration metrics.

    Deterministic given the seed, except for the wall-clock timing fields.
    The loop runs while the platform is strictly inside the road, so the last
    recorded iteration is the one whose motion carries it to or past the end.
    """
    state, rngs, grid, rmse0 = _init_episode(
        cfg, strategy, seed, time_varying, grid_step_m, init_hyper
    )
    records: list[MetricsRecord] = []
    iteration = 0
    while state.position_m < cfg.length_m:
        iteration += 1
        out = step(state, rngs, cfg, noise, grid, max_sources)
        state = out.state
        truth = true_pam_profile(state.layout, state.traffic, grid, cfg)
        value = rmse_from_values(out.grid_mean, truth)
        records.append(
            MetricsRecord(
                iteration=iteration,
                clock_s=state.clock_s,
                rmse=value,
                learning_ratio=value / rmse0,
                fit_predict_seconds=out.fit_predict_seconds,
                dataset_size=len(state.dataset),
                traffic_version=state.traffic.version,
            )
        )
    return EpisodeResult(records, rmse0, state)


def run_until_position(
    cfg: RoadConfig,
    noise: NoiseConfig,
    strategy: str,
    seed: int,
    time_varying: bool,
    at_position_m: float,
    grid_step_m: float = 10.0,
    max_sources: int = 10,
    init_hyper: GpHyperparams = INITIAL_HYPERPARAMS,
) -> tuple[SimState, int]:
    """Step an episode until the platform first reaches at_position_m.

    With at_position_m = 0 no iteration runs and the returned state holds the
    untrained prior model. Returns the state and how many iterations ran.
    """
    if not 0.0 <= at_position_m <= cfg.length_m:
        raise ValueError("at_position_m must lie within the road")
    state, rngs, grid, _ = _init_episode(
        cfg, strategy, seed, time_varying, grid_step_m, init_hyper
    )
    iteration = 0
    while state.position_m < at_position_m and state.position_m < cfg.length_m:
        iteration += 1
        state = step(state, rngs, cfg, noise, grid, max_sources).state
    return state, iteration
