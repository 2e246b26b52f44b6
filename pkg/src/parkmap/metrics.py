"""Estimation-quality metrics shared by the episode loop and the harness."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .environment import RoadConfig, World, true_pam_profile
from .gp import GpModel, posterior


@dataclass(frozen=True)
class MetricsRecord:
    """Per-iteration bookkeeping for one episode."""

    iteration: int
    clock_s: float
    rmse: float
    learning_ratio: float
    fit_predict_seconds: float
    dataset_size: int
    traffic_version: int


def prediction_grid(cfg: RoadConfig, grid_step_m: float = 10.0) -> np.ndarray:
    """Evaluation grid over the full road, both endpoints included."""
    if grid_step_m <= 0:
        raise ValueError("grid_step_m must be > 0")
    n = int(round(cfg.length_m / grid_step_m))
    return np.linspace(0.0, cfg.length_m, n + 1)


def rmse_from_values(estimate, truth) -> float:
    """Root mean squared error with the estimate clamped to the map codomain."""
    est = np.clip(np.asarray(estimate, dtype=float), 0.0, 1.0)
    d = est - np.asarray(truth, dtype=float)
    return float(np.sqrt(np.mean(d * d)))


def rmse(model: GpModel, world: World, grid_step_m: float = 10.0) -> float:
    """Grid-discretized RMSE between the model's mean map and the true map."""
    grid = prediction_grid(world.cfg, grid_step_m)
    est = posterior(model, grid).mean
    return rmse_from_values(est, true_pam_profile(world.layout, world.traffic, grid, world.cfg))
