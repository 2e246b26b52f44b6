"""End-to-end workflows behind the service endpoints and the CLI commands."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunSpec, spec_to_text
from .environment import (
    World,
    layout_to_dict,
    prior_availability_profile,
    road_config_to_dict,
    traffic_to_dict,
    true_pam_profile,
)
from .gp import posterior
from .harness import (
    METRICS_COLUMNS,
    monte_carlo,
    read_metrics_csv,
    write_learning_curve_csv,
    write_metrics_csv,
)
from .mapper import run_until_position
from .metrics import prediction_grid

METRICS_FILE = "metrics.csv"
CURVE_FILE = "learning_curve.csv"
SUMMARY_FILE = "summary.json"
MANIFEST_FILE = "manifest.json"
SPEC_FILE = "spec_resolved.cfg"
WORLD_FILE = "world.json"
MERGED_FILE = "merged.csv"

SNAPSHOT_COLUMNS = ("x", "pi", "f_true", "f_hat", "std")


class CompareError(ValueError):
    """Run directories cannot be compared (missing or mismatched artifacts)."""


@dataclass
class RunArtifacts:
    out_dir: Path
    files: list[str]
    config_hash: str
    summary: dict


@dataclass
class SnapshotArtifacts:
    out_dir: Path
    files: list[str]
    iterations: dict[str, int]


@dataclass
class CompareArtifacts:
    out_dir: Path
    files: list[str]
    report: dict


def _manifest(spec: RunSpec, extra: dict | None = None) -> dict:
    data = {
        "tool": "parkmap",
        "version": __version__,
        "config_hash": spec.config_hash(),
        "base_seed": spec.base_seed,
        "n_tests": spec.n_tests,
        "spec": spec.model_dump(),
    }
    if extra:
        data.update(extra)
    return data


def _write_json(path: Path, data: dict) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=False) + "\n", encoding="utf-8")


def execute_run(spec: RunSpec, out_dir: str | Path) -> RunArtifacts:
    """Run the full Monte-Carlo experiment and write its artifact set."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = monte_carlo(
        cfg=spec.to_road_config(),
        noise=spec.to_noise_config(),
        strategies=list(spec.strategies),
        n_tests=spec.n_tests,
        time_varying=spec.time_varying,
        base_seed=spec.base_seed,
        grid_step_m=spec.grid_step_m,
        max_sources=spec.max_sources,
    )
    summary_dict = summary.to_dict()
    summary_dict["config_hash"] = spec.config_hash()

    write_metrics_csv(out / METRICS_FILE, summary)
    write_learning_curve_csv(out / CURVE_FILE, summary)
    _write_json(out / SUMMARY_FILE, summary_dict)
    _write_json(out / MANIFEST_FILE, _manifest(spec))
    (out / SPEC_FILE).write_text(spec_to_text(spec), encoding="utf-8")

    files = [METRICS_FILE, CURVE_FILE, SUMMARY_FILE, MANIFEST_FILE, SPEC_FILE]
    return RunArtifacts(out, files, spec.config_hash(), summary_dict)


def _fmt(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def execute_snapshot(
    spec: RunSpec, at_position_m: float, out_dir: str | Path
) -> SnapshotArtifacts:
    """Profile the world and each strategy's model when the platform first
    reaches the given position (seed = base_seed)."""
    cfg = spec.to_road_config()
    noise = spec.to_noise_config()
    if not 0.0 <= at_position_m <= cfg.length_m:
        raise ValueError(f"at_position_m must lie in [0, {cfg.length_m}]")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    grid = prediction_grid(cfg, spec.grid_step_m)
    files: list[str] = []
    iterations: dict[str, int] = {}
    world: World | None = None
    for strategy in spec.strategies:
        state, n_iter = run_until_position(
            cfg,
            noise,
            strategy,
            spec.base_seed,
            spec.time_varying,
            at_position_m,
            spec.grid_step_m,
            spec.max_sources,
        )
        iterations[strategy] = n_iter
        if world is None:
            world = World(cfg, state.layout, state.traffic)
        pi = prior_availability_profile(state.layout, grid, cfg)
        truth = true_pam_profile(state.layout, state.traffic, grid, cfg)
        post = posterior(state.model, grid)
        name = f"snapshot_{strategy}.csv"
        with open(out / name, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(SNAPSHOT_COLUMNS)
            for i in range(grid.size):
                writer.writerow(
                    [
                        _fmt(float(grid[i])),
                        _fmt(float(pi[i])),
                        _fmt(float(truth[i])),
                        _fmt(float(post.mean[i])),
                        _fmt(float(np.sqrt(post.variance[i]))),
                    ]
                )
        files.append(name)

    assert world is not None
    _write_json(
        out / WORLD_FILE,
        {
            "config": road_config_to_dict(cfg),
            "layout": layout_to_dict(world.layout),
            "traffic": traffic_to_dict(world.traffic),
        },
    )
    _write_json(out / MANIFEST_FILE, _manifest(spec, {"at_position_m": at_position_m}))
    files += [WORLD_FILE, MANIFEST_FILE]
    return SnapshotArtifacts(out, files, iterations)


def _load_run_dir(path: Path) -> tuple[dict, list[dict]]:
    manifest_path = path / MANIFEST_FILE
    metrics_path = path / METRICS_FILE
    if not manifest_path.is_file():
        raise CompareError(f"{path}: missing {MANIFEST_FILE}")
    if not metrics_path.is_file():
        raise CompareError(f"{path}: missing {METRICS_FILE}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    return manifest, read_metrics_csv(metrics_path)


def _series_by_key(rows: list[dict]) -> dict[tuple, list[dict]]:
    """Group rows by (strategy, test_id), ordered by iteration."""
    grouped: dict[tuple, list[dict]] = {}
    for row in rows:
        grouped.setdefault((row["strategy"], row["test_id"]), []).append(row)
    for series in grouped.values():
        series.sort(key=lambda r: r["iteration"])
    return grouped


def _paired_win_rate(a: list[list[float]], b: list[list[float]]) -> float:
    wins = ties = total = 0
    for sa, sb in zip(a, b):
        n = min(len(sa), len(sb))
        for i in range(n):
            if sa[i] < sb[i]:
                wins += 1
            elif sa[i] == sb[i]:
                ties += 1
        total += n
    return (wins + 0.5 * ties) / total if total else float("nan")


def execute_compare(run_dirs: list[str | Path], out_dir: str | Path) -> CompareArtifacts:
    """Merge runs with identical configs and report win rates and curves."""
    if not run_dirs:
        raise CompareError("need at least one run directory")
    loaded = []
    for d in run_dirs:
        manifest, rows = _load_run_dir(Path(d))
        loaded.append((str(d), manifest, rows))
    hashes = {m.get("config_hash") for _, m, _ in loaded}
    if len(hashes) != 1:
        raise CompareError(f"config mismatch across run directories: {sorted(hashes)}")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / MERGED_FILE, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("run_id",) + METRICS_COLUMNS)
        for run_id, (_, _, rows) in enumerate(loaded):
            for r in rows:
                writer.writerow(
                    [
                        run_id,
                        r["test_id"],
                        r["strategy"],
                        r["iteration"],
                        _fmt(r["clock_t"]),
                        _fmt(r["rmse"]),
                        _fmt(r["learning_ratio"]),
                        _fmt(r["fit_predict_seconds"]),
                        r["dataset_size"],
                    ]
                )

    grouped = [_series_by_key(rows) for _, _, rows in loaded]
    strategies: list[str] = []
    for g in grouped:
        for s, _ in g:
            if s not in strategies:
                strategies.append(s)

    def ratios(run_idx: int, strategy: str) -> list[list[float]]:
        g = grouped[run_idx]
        tests = sorted(t for (s, t) in g if s == strategy)
        return [[r["learning_ratio"] for r in g[(strategy, t)]] for t in tests]

    # Mean of each strategy's final-iteration ratio, pooled over runs/tests.
    final_means = {}
    for s in strategies:
        finals = []
        for i in range(len(loaded)):
            finals += [series[-1] for series in ratios(i, s) if series]
        final_means[s] = float(np.mean(finals)) if finals else float("nan")

    strategy_pairs = {}
    for a in strategies:
        for b in strategies:
            if a == b:
                continue
            rates = []
            for i in range(len(loaded)):
                ra, rb = ratios(i, a), ratios(i, b)
                if ra and rb:
                    rates.append(_paired_win_rate(ra, rb))
            if rates:
                strategy_pairs[f"{a}_vs_{b}"] = float(np.mean(rates))

    cross_run = {}
    for i in range(len(loaded)):
        for j in range(len(loaded)):
            if i == j:
                continue
            for s in strategies:
                ra, rb = ratios(i, s), ratios(j, s)
                if ra and rb:
                    cross_run[f"run{i}_vs_run{j}:{s}"] = _paired_win_rate(ra, rb)

    tau_medians = {}
    for i, g in enumerate(grouped):
        taus = []
        tests = sorted(t for (s, t) in g if s == "uncertainty" and ("take_all", t) in g)
        for t in tests:
            prop = [r["fit_predict_seconds"] for r in g[("uncertainty", t)]]
            full = [r["fit_predict_seconds"] for r in g[("take_all", t)]]
            n = min(len(prop), len(full))
            taus += [prop[k] / full[k] for k in range(n) if full[k] != 0]
        if taus:
            tau_medians[f"run{i}"] = float(np.median(taus))

    report = {
        "run_dirs": [d for d, _, _ in loaded],
        "config_hash": hashes.pop(),
        "strategies": strategies,
        "final_mean_learning_ratio": final_means,
        "strategy_win_rates": strategy_pairs,
        "cross_run_win_rates": cross_run,
        "tau_medians": tau_medians,
    }
    _write_json(out / "compare.json", report)
    return CompareArtifacts(out, [MERGED_FILE, "compare.json"], report)
