"""Per-iteration choice of which incoming measurements to keep."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gp import GpModel, posterior
from .sensing import Measurement

STRATEGIES = ("uncertainty", "random", "take_all", "platform_only")


@dataclass(frozen=True)
class CandidateSet:
    """Incoming measurements for one iteration: the platform reading first,
    then external sources in arrival order."""

    items: tuple[Measurement, ...]

    def positions(self) -> np.ndarray:
        return np.array([m.position_m for m in self.items])


def acquisition(model: GpModel, x: float) -> float:
    """Informativeness of sampling at x: the posterior standard deviation.

    Uses the latent variance (no observation noise), so an untrained model
    scores every position at the prior deviation.
    """
    return float(np.sqrt(posterior(model, [x]).variance[0]))


def acquisition_profile(model: GpModel, xs) -> np.ndarray:
    """Vectorized acquisition over an array of positions."""
    return np.sqrt(posterior(model, xs).variance)


def select(
    model: GpModel,
    candidates: CandidateSet,
    strategy: str,
    rng: np.random.Generator | None = None,
) -> list[Measurement]:
    """Apply a selection strategy to the iteration's candidates.

    uncertainty keeps the single highest-acquisition candidate (first wins
    ties, which favors the fresh platform reading); random keeps one uniformly
    at random; take_all keeps everything; platform_only keeps the platform
    reading alone. Selection never looks at label values.
    """
    items = list(candidates.items)
    if not items:
        raise ValueError("candidate set is empty")
    if strategy == "uncertainty":
        scores = acquisition_profile(model, candidates.positions())
        return [items[int(np.argmax(scores))]]
    if strategy == "random":
        if rng is None:
            raise ValueError("random strategy needs an rng")
        return [items[int(rng.integers(len(items)))]]
    if strategy == "take_all":
        return items
    if strategy == "platform_only":
        return [items[0]]
    raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
