"""Command-line client for the mapping service.

Commands build the same request models the HTTP endpoints accept and execute
them in process by default; pass --server to send them to a running service
instead. Exit codes: 0 success, 2 invalid configuration, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import sys

from pydantic import ValidationError

from . import __version__
from .config import RunSpec, SpecError, apply_overrides, load_spec_file
from .experiments import (
    CompareError,
    execute_compare,
    execute_run,
    execute_snapshot,
)
from .service.schemas import (
    CompareRequest,
    CompareResponse,
    RunRequest,
    RunResponse,
    SnapshotRequest,
    SnapshotResponse,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parkmap",
        description="Online adaptive parking-availability mapping experiments",
    )
    parser.add_argument("--version", action="version", version=f"parkmap {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_spec_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--spec", help="run-spec file (key = value lines); defaults apply if omitted")
        p.add_argument("--seed", type=int, help="override base_seed")
        p.add_argument("--n-tests", type=int, help="override n_tests")
        p.add_argument("--strategies", help="override strategies (comma separated)")
        p.add_argument(
            "--time-varying",
            action=argparse.BooleanOptionalAction,
            default=None,
            help="override time_varying",
        )
        p.add_argument("--grid-step", type=float, help="override grid_step_m")
        p.add_argument("--server", help="send the request to a running service at this URL")

    p_run = sub.add_parser("run", help="run the Monte-Carlo experiment and write artifacts")
    add_spec_flags(p_run)
    p_run.add_argument("--out", default="parkmap_run", help="output directory")
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="merge finished runs and report win rates")
    p_cmp.add_argument("run_dirs", nargs="+", help="run output directories")
    p_cmp.add_argument("--out", default="parkmap_compare", help="output directory")
    p_cmp.add_argument("--server", help="send the request to a running service at this URL")
    p_cmp.set_defaults(func=cmd_compare)

    p_snap = sub.add_parser(
        "snapshot", help="profile truth, prior, and each model at a platform position"
    )
    add_spec_flags(p_snap)
    p_snap.add_argument("--at", type=float, required=True, help="platform position in meters")
    p_snap.add_argument("--out", default="parkmap_snapshot", help="output directory")
    p_snap.set_defaults(func=cmd_snapshot)

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def _build_spec(args: argparse.Namespace) -> RunSpec:
    spec = load_spec_file(args.spec) if args.spec else RunSpec()
    return apply_overrides(
        spec,
        base_seed=args.seed,
        n_tests=args.n_tests,
        strategies=args.strategies,
        time_varying=args.time_varying,
        grid_step_m=args.grid_step,
    )


def _post(server: str, route: str, payload: dict) -> dict:
    import httpx

    resp = httpx.post(server.rstrip("/") + route, json=payload, timeout=None)
    if resp.status_code >= 400:
        detail = resp.json().get("detail", resp.text) if resp.content else resp.text
        if resp.status_code < 500:
            raise SpecError(f"{route} failed ({resp.status_code}): {detail}")
        raise RuntimeError(f"{route} failed ({resp.status_code}): {detail}")
    return resp.json()


def cmd_run(args: argparse.Namespace) -> int:
    req = RunRequest(spec=_build_spec(args), out_dir=args.out)
    if args.server:
        resp = RunResponse(**_post(args.server, "/run", req.model_dump(mode="json")))
    else:
        art = execute_run(req.spec, req.out_dir)
        resp = RunResponse(
            out_dir=str(art.out_dir),
            files=art.files,
            config_hash=art.config_hash,
            summary=art.summary,
        )
    print(f"run complete: {len(resp.files)} files in {resp.out_dir}")
    curves = resp.summary.get("learning_curves", {})
    for s in resp.summary.get("strategies", []):
        mean = curves[s]["mean"]
        print(f"  {s:14s} final mean learning ratio {mean[-1]:.4f}")
    for key, stats in resp.summary.get("win_rates", {}).items():
        print(f"  win rate {key}: {stats['pooled']:.3f}")
    ratio = resp.summary.get("time_ratio")
    if ratio:
        print(
            f"  fit-time ratio median {ratio['median']:.3f} "
            f"(below 1 in {100 * ratio['frac_below_one']:.0f}% of iterations)"
        )
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    req = CompareRequest(run_dirs=args.run_dirs, out_dir=args.out)
    if args.server:
        resp = CompareResponse(**_post(args.server, "/compare", req.model_dump(mode="json")))
    else:
        art = execute_compare(list(req.run_dirs), req.out_dir)
        resp = CompareResponse(out_dir=str(art.out_dir), files=art.files, report=art.report)
    report = resp.report
    print(f"compared {len(report['run_dirs'])} runs; merged CSV in {resp.out_dir}")
    for s, v in report["final_mean_learning_ratio"].items():
        print(f"  {s:14s} final mean learning ratio {v:.4f}")
    for key, v in report["strategy_win_rates"].items():
        print(f"  win rate {key}: {v:.3f}")
    for key, v in report["cross_run_win_rates"].items():
        print(f"  cross-run win rate {key}: {v:.3f}")
    for key, v in report["tau_medians"].items():
        print(f"  fit-time ratio median {key}: {v:.3f}")
    return 0


def cmd_snapshot(args: argparse.Namespace) -> int:
    req = SnapshotRequest(spec=_build_spec(args), at_position_m=args.at, out_dir=args.out)
    if args.server:
        resp = SnapshotResponse(**_post(args.server, "/snapshot", req.model_dump(mode="json")))
    else:
        art = execute_snapshot(req.spec, req.at_position_m, req.out_dir)
        resp = SnapshotResponse(
            out_dir=str(art.out_dir), files=art.files, iterations=art.iterations
        )
    print(f"snapshot at {args.at} m: {len(resp.files)} files in {resp.out_dir}")
    for s, n in resp.iterations.items():
        print(f"  {s:14s} reached it after {n} iterations")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _format_validation_error(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        field = ".".join(str(p) for p in err["loc"]) or "spec"
        lines.append(f"{field}: {err['msg']}")
    return "\n".join(lines)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"invalid configuration:\n{_format_validation_error(exc)}", file=sys.stderr)
        return 2
    except (SpecError, CompareError, ValueError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - surfaced as exit status
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
