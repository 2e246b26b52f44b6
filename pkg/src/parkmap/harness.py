"""Paired Monte-Carlo comparison of selection strategies.

Every test index reuses one seed across all strategy arms, so each arm sees
the same world realization, the same platform noise, and the same external
sources; arms differ only in what they keep. That pairing makes per-iteration
win rates meaningful at small test counts.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .environment import RoadConfig
from .mapper import EpisodeResult, run_episode
from .metrics import MetricsRecord
from .sensing import NoiseConfig

METRICS_COLUMNS = (
    "test_id",
    "strategy",
    "iteration",
    "clock_t",
    "rmse",
    "learning_ratio",
    "fit_predict_seconds",
    "dataset_size",
)

CURVE_COLUMNS = ("strategy", "iteration", "n_tests", "mean", "lo68", "hi68")


@dataclass
class McSummary:
    """Aggregates over one Monte-Carlo experiment, plus the raw episodes."""

    strategies: list[str]
    n_tests: int
    time_varying: bool
    base_seed: int
    episodes: dict[str, list[EpisodeResult]]
    rmse0: dict[str, list[float]]
    curves: dict[str, dict]
    win_rates: dict[str, dict]
    time_ratio: dict | None

    def to_dict(self) -> dict:
        """JSON-ready aggregate view (raw episodes excluded)."""
        return {
            "strategies": list(self.strategies),
            "n_tests": self.n_tests,
            "time_varying": self.time_varying,
            "base_seed": self.base_seed,
            "iterations_per_test": {
                s: [len(ep.records) for ep in eps] for s, eps in self.episodes.items()
            },
            "rmse0": self.rmse0,
            "learning_curves": self.curves,
            "win_rates": self.win_rates,
            "time_ratio": self.time_ratio,
        }


def processing_ratio(
    proposed: list[MetricsRecord], nosel: list[MetricsRecord]
) -> np.ndarray:
    """Element-wise fit-time ratio between two record series.

    Series are truncated to the shorter one; entries with a zero denominator
    become NaN and are excluded from any aggregate.
    """
    n = min(len(proposed), len(nosel))
    num = np.array([r.fit_predict_seconds for r in proposed[:n]])
    den = np.array([r.fit_predict_seconds for r in nosel[:n]])
    out = np.full(n, np.nan)
    ok = den != 0
    out[ok] = num[ok] / den[ok]
    return out


def _ratio_series(episodes: list[EpisodeResult]) -> list[np.ndarray]:
    return [np.array([r.learning_ratio for r in ep.records]) for ep in episodes]


def _curve(episodes: list[EpisodeResult]) -> dict:
    """Per-iteration mean and 16th-84th percentile band across tests."""
    series = _ratio_series(episodes)
    longest = max(len(s) for s in series)
    iters, mean, lo, hi, counts = [], [], [], [], []
    for i in range(longest):
        vals = np.array([s[i] for s in series if len(s) > i])
        iters.append(i + 1)
        counts.append(int(vals.size))
        mean.append(float(vals.mean()))
        lo.append(float(np.percentile(vals, 16)))
        hi.append(float(np.percentile(vals, 84)))
    return {"iteration": iters, "n_tests": counts, "mean": mean, "lo68": lo, "hi68": hi}


def win_stats(a: list[EpisodeResult], b: list[EpisodeResult]) -> dict:
    """How often arm a's learning ratio beats arm b's, paired per iteration.

    Exact ties count half. Reports the pooled per-iteration rate plus each
    run's rate and their median.
    """
    wins = ties = total = 0
    per_run = []
    for ea, eb in zip(a, b):
        n = min(len(ea.records), len(eb.records))
        w = t = 0
        for i in range(n):
            x = ea.records[i].learning_ratio
            y = eb.records[i].learning_ratio
            if x < y:
                w += 1
            elif x == y:
                t += 1
        per_run.append((w + 0.5 * t) / n if n else float("nan"))
        wins += w
        ties += t
        total += n
    return {
        "pooled": (wins + 0.5 * ties) / total if total else float("nan"),
        "per_run": per_run,
        "per_run_median": float(np.median(per_run)),
    }


def _time_ratio_summary(
    proposed: list[EpisodeResult], nosel: list[EpisodeResult]
) -> dict:
    pooled = np.concatenate(
        [processing_ratio(p.records, q.records) for p, q in zip(proposed, nosel)]
    )
    valid = pooled[np.isfinite(pooled)]
    per_iter = []
    longest = max(len(p.records) for p in proposed)
    series = [processing_ratio(p.records, q.records) for p, q in zip(proposed, nosel)]
    for i in range(longest):
        vals = np.array([s[i] for s in series if len(s) > i])
        vals = vals[np.isfinite(vals)]
        per_iter.append(float(np.median(vals)) if vals.size else float("nan"))
    return {
        "median": float(np.median(valid)) if valid.size else float("nan"),
        "frac_below_one": float(np.mean(valid < 1.0)) if valid.size else float("nan"),
        "by_iteration_median": per_iter,
    }


def monte_carlo(
    cfg: RoadConfig,
    noise: NoiseConfig,
    strategies: list[str],
    n_tests: int,
    time_varying: bool,
    base_seed: int,
    grid_step_m: float = 10.0,
    max_sources: int = 10,
) -> McSummary:
    """Run every strategy over n_tests paired worlds and aggregate.

    Arms run sequentially (never interleaved) so the recorded fit timings are
    comparable. Win rates are reported for every ordered strategy pair; the
    fit-time ratio summary appears when both uncertainty and take_all ran.
    """
    if n_tests < 1:
        raise ValueError("n_tests must be >= 1")
    if not strategies:
        raise ValueError("strategies must be non-empty")
    if len(set(strategies)) != len(strategies):
        raise ValueError("strategies must be unique")

    episodes: dict[str, list[EpisodeResult]] = {s: [] for s in strategies}
    for s in strategies:
        for i in range(n_tests):
            episodes[s].append(
                run_episode(
                    cfg, noise, s, base_seed + i, time_varying, grid_step_m, max_sources
                )
            )

    rmse0 = {s: [ep.rmse0 for ep in eps] for s, eps in episodes.items()}
    for i in range(n_tests):
        values = {rmse0[s][i] for s in strategies}
        if len(values) != 1:
            raise RuntimeError(
                f"paired arms disagree on the pre-data RMSE in test {i}: {values}"
            )

    curves = {s: _curve(eps) for s, eps in episodes.items()}
    win_rates = {
        f"{a}_vs_{b}": win_stats(episodes[a], episodes[b])
        for a in strategies
        for b in strategies
        if a != b
    }
    time_ratio = None
    if "uncertainty" in strategies and "take_all" in strategies:
        time_ratio = _time_ratio_summary(episodes["uncertainty"], episodes["take_all"])

    return McSummary(
        strategies=list(strategies),
        n_tests=n_tests,
        time_varying=time_varying,
        base_seed=base_seed,
        episodes=episodes,
        rmse0=rmse0,
        curves=curves,
        win_rates=win_rates,
        time_ratio=time_ratio,
    )


def _fmt(value) -> str:
    # repr keeps the shortest text that round-trips back to the same float
    return repr(value) if isinstance(value, float) else str(value)


def write_metrics_csv(path: str | Path, summary: McSummary) -> None:
    """Per-iteration records for every (test, strategy), in deterministic order."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_COLUMNS)
        for test_id in range(summary.n_tests):
            for s in summary.strategies:
                for rec in summary.episodes[s][test_id].records:
                    writer.writerow(
                        [
                            test_id,
                            s,
                            rec.iteration,
                            _fmt(rec.clock_s),
                            _fmt(rec.rmse),
                            _fmt(rec.learning_ratio),
                            _fmt(rec.fit_predict_seconds),
                            rec.dataset_size,
                        ]
                    )


def read_metrics_csv(path: str | Path) -> list[dict]:
    """Parse a metrics CSV back into typed rows."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            rows.append(
                {
                    "test_id": int(row["test_id"]),
                    "strategy": row["strategy"],
                    "iteration": int(row["iteration"]),
                    "clock_t": float(row["clock_t"]),
                    "rmse": float(row["rmse"]),
                    "learning_ratio": float(row["learning_ratio"]),
                    "fit_predict_seconds": float(row["fit_predict_seconds"]),
                    "dataset_size": int(row["dataset_size"]),
                }
            )
    return rows


def write_learning_curve_csv(path: str | Path, summary: McSummary) -> None:
    """Aggregate curves (mean plus 68% band) per strategy, for plotting."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CURVE_COLUMNS)
        for s in summary.strategies:
            c = summary.curves[s]
            for i in range(len(c["iteration"])):
                writer.writerow(
                    [
                        s,
                        c["iteration"][i],
                        c["n_tests"][i],
                        _fmt(c["mean"][i]),
                        _fmt(c["lo68"][i]),
                        _fmt(c["hi68"][i]),
                    ]
                )
