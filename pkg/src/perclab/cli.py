"""Command-line entry point.

Exit codes: 0 when the claim is certified or reproduced, 2 when it is not
established (a legitimate outcome), 1 on operational failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import __version__

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_NOT_ESTABLISHED = 2

FORMATS = ("csv", "json", "text")


class CliError(Exception):
    pass


@dataclass
class Result:
    payload: dict
    verdict: bool
    table: str | None = None  # CSV body, when the result is naturally tabular


@dataclass
class RunManifest:
    subcommand: str
    config: dict
    tool_version: str
    input_hash: str
    outputs: list[str] = field(default_factory=list)
    started: str = ""
    finished: str = ""
    wall_seconds: float = 0.0
    exit_code: int = 0

    def to_json(self) -> dict:
        return asdict(self)


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def _kv_csv(payload: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    for k, v in payload.items():
        w.writerow([k, v if not isinstance(v, (dict, list)) else _canonical(v)])
    return buf.getvalue()


def _text(payload: dict, table: str | None) -> str:
    lines = []
    if table:
        lines.append(table.rstrip("\n"))
    for k, v in payload.items():
        if k == "rows":
            continue
        lines.append(f"{k}: {v if not isinstance(v, (dict, list)) else _canonical(v)}")
    return "\n".join(lines) + "\n"


def render(result: Result, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(result.payload, indent=2, default=str) + "\n"
    if fmt == "csv":
        return result.table if result.table is not None else _kv_csv(result.payload)
    return _text(result.payload, result.table)


# ---------------------------------------------------------------------------
# Subcommands


def cmd_table1(theta: float = 0.18, start_p: float = 0.8457, target: float = 0.8639,
               extra_rows: int = 1, max_depth: int = 64) -> Result:
    from .cascades import z2_upper_iterate
    from .relaxation import TwoProbability

    trace = z2_upper_iterate(TwoProbability(start_p), theta, target, max_depth, extra_rows)
    payload = {
        "theta": theta,
        "start": start_p,
        "target": target,
        "verdict": trace.verdict,
        "reached_at": trace.reached_at,
        "note": trace.note,
        "rows": [r.to_json() for r in trace.rows],
    }
    return Result(payload, trace.verdict, trace.to_csv())


def cmd_table2(theta: float = 0.18, start_p: float = 0.8459, depth: int = 13) -> Result:
    from .cascades import origin_sum
    from .relaxation import TwoProbability

    res = origin_sum(TwoProbability(start_p), theta, depth)
    payload = {"theta": theta, "start": start_p, "depth": depth, "verdict": res.positive_probability}
    payload.update(res.to_json())
    return Result(payload, res.positive_probability, res.trace.to_csv())


def cmd_q6(p: float = 0.5847, p_second: float | None = None) -> Result:
    from .relaxation import q6_connectivity_bound

    bound = q6_connectivity_bound(p, p_second)
    return Result(bound.to_json(), bound.passes)


def cmd_lower_bounds(p_site: float = 0.592746) -> Result:
    from .models import ModelSpec, edge_probability, lower_bound_combination

    comb = lower_bound_combination()
    payload = {
        "combined": comb["value"],
        "x_star": comb["x_star"],
        "udlra_side": comb["udlra_side"],
        "dfh_side": comb["dfh_side"],
        "udlra_p_site": p_site,
        "udlra_at_p_site": edge_probability(ModelSpec("udlra", p_site)),
        "direction_min": edge_probability(ModelSpec("direction", 0.5)),
    }
    return Result(payload, True)


DEFAULT_VERIFY_MODELS = ("udlra:0.592746", "direction:0.3013", "signs:0.5")


def cmd_verify_models(window: str = "2x3", models=DEFAULT_VERIFY_MODELS,
                      broken_fixture: bool = False, tol: float = 1e-12) -> Result:
    from .models import (
        ModelSpec,
        Window,
        column_coin_distribution,
        exact_window_distribution,
        one_independence_gap,
    )

    win = Window.parse(window)
    checks = []
    for text in models:
        gap = one_independence_gap(exact_window_distribution(ModelSpec.parse(text), win))
        checks.append({"model": text, "window": window, "gap": gap, "passes": gap <= tol})
    if broken_fixture:
        gap = one_independence_gap(column_coin_distribution(win))
        checks.append({"model": "column_coin_fixture", "window": window, "gap": gap, "passes": gap <= tol})
    ok = all(c["passes"] for c in checks)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["model", "window", "gap", "passes"])
    for c in checks:
        w.writerow([c["model"], c["window"], f"{c['gap']:.3e}", c["passes"]])
    return Result({"window": window, "tol": tol, "checks": checks, "all_pass": ok}, ok, buf.getvalue())


def cmd_fixture() -> Result:
    from .grid import enumeration_fixture, verify_ten_pattern_cover

    payload = enumeration_fixture()
    payload["ten_pattern_cover"] = verify_ten_pattern_cover()
    return Result(payload, payload["ten_pattern_cover"])


def cmd_simulate(experiment: str = "crossing", N: int = 50_000, T: int = 30,
                 model: str | None = None, threshold: float | None = None, seed: int = 0,
                 alpha: float | None = None, threads: int | None = None,
                 backend: str | None = None) -> Result:
    from .models import ModelSpec
    from .montecarlo.experiment import (
        DEFAULT_ALPHA,
        DEFAULT_MODEL,
        DEFAULT_THRESHOLD,
        ExperimentConfig,
        run_experiment,
    )

    cfg = ExperimentConfig(
        N=N,
        T=T,
        model=ModelSpec.parse(model or DEFAULT_MODEL),
        threshold=DEFAULT_THRESHOLD if threshold is None else threshold,
        experiment=experiment,
        seed=seed,
        alpha=DEFAULT_ALPHA if alpha is None else alpha,
    )
    report = run_experiment(cfg, threads, backend)
    return Result(report.to_json(), report.passes)


# ---------------------------------------------------------------------------
# Argument handling


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors are operational failures
        self.print_usage(sys.stderr)
        self.exit(EXIT_FAILED, f"{self.prog}: error: {message}\n")


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default=None,
                        help="output format (default: csv for tables, json otherwise)")
    common.add_argument("--out", type=Path, default=None,
                        help="directory for results and manifest, or a result file path")

    parser = _Parser(prog="perclab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"perclab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("table1", parents=[common], help="Z^2 upper-bound iteration")
    p.add_argument("--theta", type=float, default=0.18)
    p.add_argument("--start", type=float, default=0.8457)
    p.add_argument("--target", type=float, default=0.8639)
    p.add_argument("--extra-rows", type=int, default=1)
    p.add_argument("--max-depth", type=int, default=64)

    p = sub.add_parser("table2", parents=[common], help="origin-probability union bound")
    p.add_argument("--theta", type=float, default=0.18)
    p.add_argument("--start", type=float, default=0.8459)
    p.add_argument("--depth", type=int, default=13)

    p = sub.add_parser("q6", parents=[common], help="Q_6 connectivity chain from Q_3 LPs")
    p.add_argument("--p", type=float, default=0.5847)
    p.add_argument("--p-second", type=float, default=None)

    p = sub.add_parser("lower-bounds", parents=[common], help="closed-form lower bounds")
    p.add_argument("--p-site", type=float, default=0.592746)

    p = sub.add_parser("verify-models", parents=[common], help="exact 1-independence checks")
    p.add_argument("--window", default="2x3")
    p.add_argument("--model", action="append", default=None, help="kind:param, repeatable")
    p.add_argument("--broken-fixture", action="store_true",
                   help="also check the 2-dependent column-coin fixture")
    p.add_argument("--tol", type=float, default=1e-12)

    sub.add_parser("fixture", parents=[common], help="enumeration counts for small graphs")

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo block-event experiment")
    p.add_argument("--experiment", choices=("dual", "crossing", "dual_components", "crossings"),
                   default="crossing")
    p.add_argument("--N", type=int, default=50_000)
    p.add_argument("--T", type=int, default=30)
    p.add_argument("--model", default=None)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--threads", type=int, default=None, help="default: $PERCLAB_THREADS or 1")
    p.add_argument("--backend", choices=("python", "cython"), default=None)
    return parser


def _dispatch(args) -> Result:
    c = args.command
    if c == "table1":
        return cmd_table1(args.theta, args.start, args.target, args.extra_rows, args.max_depth)
    if c == "table2":
        return cmd_table2(args.theta, args.start, args.depth)
    if c == "q6":
        return cmd_q6(args.p, args.p_second)
    if c == "lower-bounds":
        return cmd_lower_bounds(args.p_site)
    if c == "verify-models":
        return cmd_verify_models(args.window, args.model or DEFAULT_VERIFY_MODELS,
                                 args.broken_fixture, args.tol)
    if c == "fixture":
        return cmd_fixture()
    if c == "simulate":
        return cmd_simulate(args.experiment, args.N, args.T, args.model, args.threshold,
                            args.seed, args.alpha, args.threads, args.backend)
    raise CliError(f"unknown command {c}")


def _config_of(args) -> dict:
    return {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items())}


def _targets(out: Path, command: str, fmt: str) -> tuple[Path, Path]:
    ext = {"csv": ".csv", "json": ".json", "text": ".txt"}[fmt]
    if out.suffix:
        return out, out.with_name(out.stem + ".manifest.json")
    return out / f"{command}{ext}", out / f"{command}.manifest.json"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fmt = args.format or ("csv" if args.command in ("table1", "table2") else "json")
    if args.out is not None and args.out.suffix and args.format is None:
        fmt = {".csv": "csv", ".json": "json", ".txt": "text"}.get(args.out.suffix, fmt)
    config = _config_of(args)
    manifest = RunManifest(args.command, config, __version__, _sha256(_canonical(config)))
    manifest.started = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()
    try:
        result = _dispatch(args)
    except Exception as exc:  # noqa: BLE001
        print(f"perclab {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAILED
    code = EXIT_OK if result.verdict else EXIT_NOT_ESTABLISHED
    text = render(result, fmt)
    manifest.wall_seconds = time.perf_counter() - t0
    manifest.finished = datetime.now(timezone.utc).isoformat()
    manifest.exit_code = code
    if args.out is None:
        sys.stdout.write(text)
        return code
    try:
        out_path, man_path = _targets(args.out, args.command, fmt)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_text(text)
        manifest.outputs = [str(out_path)]
        man_path.write_text(json.dumps(manifest.to_json(), indent=2, default=str) + "\n")
    except OSError as exc:
        print(f"perclab {args.command}: cannot write output: {exc}", file=sys.stderr)
        return EXIT_FAILED
    print(out_path)
    return code


if __name__ == "__main__":
    sys.exit(main())
