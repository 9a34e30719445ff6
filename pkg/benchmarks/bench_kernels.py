"""Time the pure-Python and compiled trial kernels on identical keyed trials.

    python3 benchmarks/bench_kernels.py --dual-N 300 --crossing-N 2000 --trials 3
"""

from __future__ import annotations

import argparse
import statistics
import time

from perclab.models import KIND_CODE, ModelSpec
from perclab.montecarlo import get_kernels, trial_key
from perclab.montecarlo.prng import ARC4_DROP


def _time(fn, trials: int) -> tuple[float, list[int]]:
    times, outcomes = [], []
    for t in range(trials):
        t0 = time.perf_counter()
        outcomes.append(fn(t))
        times.append(time.perf_counter() - t0)
    return statistics.median(times), outcomes


def bench(model: str, dual_n: int, crossing_n: int, trials: int) -> list[dict]:
    spec = ModelSpec.parse(model)
    kind, thr = KIND_CODE[spec.kind], spec.thresholds()
    rows = []
    cases = {
        "dual_components": (dual_n, lambda k, t: k.dual_trial_key(
            trial_key("dual_components", 0, t), dual_n, kind, thr, ARC4_DROP)),
        "crossings": (crossing_n, lambda k, t: k.crossing_trial_key(
            trial_key("crossings", 0, t), crossing_n, kind, thr)),
    }
    for name, (n, run) in cases.items():
        res = {}
        for backend in ("python", "cython"):
            try:
                k = get_kernels(backend)
            except ImportError:
                continue
            res[backend] = _time(lambda t, k=k: run(k, t), trials)
        if len(res) == 2 and res["python"][1] != res["cython"][1]:
            raise SystemExit(f"{name}: backends disagree: {res}")
        row = {"experiment": name, "N": n, **{b: m for b, (m, _) in res.items()}}
        if len(res) == 2:
            row["speedup"] = res["python"][0] / res["cython"][0]
        rows.append(row)
    return rows


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--model", default="direction:0.3013")
    ap.add_argument("--dual-N", type=int, default=300)
    ap.add_argument("--crossing-N", type=int, default=2000)
    ap.add_argument("--trials", type=int, default=3)
    args = ap.parse_args(argv)
    print(f"{'experiment':<16} {'N':>7} {'python s':>10} {'cython s':>10} {'speedup':>8}")
    for r in bench(args.model, args.dual_N, args.crossing_N, args.trials):
        py = f"{r['python']:.4f}" if "python" in r else "-"
        cy = f"{r['cython']:.4f}" if "cython" in r else "-"
        sp = f"{r['speedup']:.1f}x" if "speedup" in r else "-"
        print(f"{r['experiment']:<16} {r['N']:>7} {py:>10} {cy:>10} {sp:>8}")


if __name__ == "__main__":
    main()
