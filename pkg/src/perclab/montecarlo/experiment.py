"""Seeded trial harness for the two renormalised-block experiments."""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

from ..models import KIND_CODE, ModelSpec
from . import _backend
from .prng import ARC4_DROP, trial_key
from .stats import binomial_tail

EXPERIMENTS = ("dual_components", "crossings")
ALIASES = {"dual": "dual_components", "crossing": "crossings"}

DEFAULT_MODEL = "direction:0.3013"
DEFAULT_THRESHOLD = 0.8457
DEFAULT_ALPHA = 0.01
MAX_N = 1 << 24


class TrialError(RuntimeError):
    def __init__(self, index: int, cause: BaseException):
        super().__init__(f"trial {index} failed: {cause!r}")
        self.index = index


@dataclass(frozen=True)
class ExperimentConfig:
    N: int
    T: int
    model: ModelSpec = field(default_factory=lambda: ModelSpec.parse(DEFAULT_MODEL))
    threshold: float = DEFAULT_THRESHOLD
    experiment: str = "crossings"
    seed: int = 0
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self):
        object.__setattr__(self, "experiment", ALIASES.get(self.experiment, self.experiment))
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"experiment must be one of {EXPERIMENTS}")
        if not isinstance(self.N, int) or not 4 <= self.N <= MAX_N:
            raise ValueError(f"N must be an integer in [4, {MAX_N}]")
        if not isinstance(self.T, int) or self.T < 1:
            raise ValueError("T must be a positive integer")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must lie in (0, 1)")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must be an unsigned 64-bit value")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")

    def to_json(self) -> dict:
        d = asdict(self)
        d["model"] = str(self.model)
        return d


@dataclass(frozen=True)
class ExperimentReport:
    successes: int
    trials: int
    threshold: float
    p_value: float
    passes: bool
    durations: tuple[float, ...]
    config: dict
    backend: str

    def to_json(self) -> dict:
        d = asdict(self)
        d["durations"] = list(self.durations)
        return d

    def outcome(self) -> dict:
        """Everything except timings, for replay comparisons."""
        d = self.to_json()
        del d["durations"]
        return d


def run_trial(cfg: ExperimentConfig, index: int, backend: str | None = None) -> bool:
    k = _backend.get_kernels(backend)
    kind = KIND_CODE[cfg.model.kind]
    thr = cfg.model.thresholds()
    key = trial_key(cfg.experiment, cfg.seed, index)
    if cfg.experiment == "dual_components":
        return bool(k.dual_trial_key(key, cfg.N, kind, thr, ARC4_DROP))
    return bool(k.crossing_trial_key(key, cfg.N, kind, thr))


def _timed_trial(args) -> tuple[bool, float]:
    cfg, index, backend = args
    t0 = time.perf_counter()
    try:
        ok = run_trial(cfg, index, backend)
    except Exception as exc:  # noqa: BLE001
        raise TrialError(index, exc) from exc
    return ok, time.perf_counter() - t0


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("PERCLAB_THREADS", "1")))
    except ValueError:
        return 1


def run_experiment(cfg: ExperimentConfig, threads: int | None = None, backend: str | None = None) -> ExperimentReport:
    """Run ``cfg.T`` independent trials; trial ``i`` is keyed by (seed, i)."""
    threads = default_threads() if threads is None else threads
    jobs = [(cfg, i, backend) for i in range(cfg.T)]
    if threads > 1 and cfg.T > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_timed_trial, jobs))
    else:
        results = [_timed_trial(j) for j in jobs]
    k = sum(ok for ok, _ in results)
    p = binomial_tail(cfg.T, cfg.threshold, k)
    return ExperimentReport(
        successes=k,
        trials=cfg.T,
        threshold=cfg.threshold,
        p_value=p,
        passes=p < cfg.alpha,
        durations=tuple(d for _, d in results),
        config=cfg.to_json(),
        backend=backend or _backend.BACKEND,
    )
