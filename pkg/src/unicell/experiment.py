"""Monte Carlo runs of the full pipeline: sample, kernelize, enumerate, aggregate.

Sample ``s`` of a run draws everything from its own stream, seeded by
``derive_seed(master_seed, s)``, so results do not depend on how samples
are spread over workers. Outputs are written in sample order by the parent
process only.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .cperm import _check_feasible
from .cycles import enumerate_short_cycles
from .maps import kernelize, sample_map
from .stats import ExperimentSummary, SampleResult, ScalingParams, WindowSpec

log = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
FLUSH_EVERY = 1000
CHUNK = 50


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, index: int) -> int:
    """64-bit seed of sample ``index``; a fixed function of both arguments."""
    return _splitmix64(_splitmix64(master_seed & MASK64) ^ (index & MASK64))


def default_workers() -> int:
    env = os.environ.get("UNICELL_WORKERS")
    if env:
        try:
            w = int(env)
        except ValueError:
            raise ValueError(f"UNICELL_WORKERS must be an integer, got {env!r}") from None
        if w < 1:
            raise ValueError("UNICELL_WORKERS must be >= 1")
        return w
    return os.cpu_count() or 1


@dataclass
class ExperimentConfig:
    n: int
    g: int
    samples: int
    windows: WindowSpec = field(default_factory=lambda: WindowSpec(((0.0, 1.0), (1.0, 2.0))))
    x_max: float | None = None  # defaults to the top of the windows
    master_seed: int = 0
    workers: int | None = None
    include_loops: bool = False
    output: str | None = None
    format: str = "json"

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.x_max is None:
            self.x_max = self.windows.upper
        if self.x_max <= 0:
            raise ValueError("x_max must be positive")
        if self.windows.upper > self.x_max:
            raise ValueError("windows must lie within [0, x_max)")
        if self.format not in ("json", "csv"):
            raise ValueError("format must be json or csv")
        _check_feasible(self.n + 1, self.g)
        if self.n < 1:
            raise ValueError("n must be >= 1")

    @property
    def cap(self) -> int:
        if self.g == 0:
            return 1
        return ScalingParams(self.n, self.g).cap(self.x_max)

    def to_json(self) -> dict:
        d = asdict(self)
        d["windows"] = [list(w) for w in self.windows.intervals]
        d["cap"] = self.cap
        d.pop("workers")  # output must not depend on it
        return d


def run_sample(n: int, g: int, cap: int, include_loops: bool, sample_id: int, seed: int) -> SampleResult:
    rng = np.random.default_rng(seed)
    _, G = sample_map(n, g, rng)
    if g == 0:
        empty = np.zeros(0, dtype=np.int64)
        return SampleResult(sample_id, seed, empty, empty)
    K = kernelize(G)
    cl = enumerate_short_cycles(K, cap, include_loops=include_loops)
    return SampleResult(sample_id, seed, cl.lengths, cl.junctions, cl.truncated)


def _run_chunk(args) -> list[SampleResult]:
    n, g, cap, include_loops, master_seed, ids = args
    return [run_sample(n, g, cap, include_loops, s, derive_seed(master_seed, s)) for s in ids]


class _Writer:
    """Single writer; the file on disk is valid CSV/JSON after every flush."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.path = Path(cfg.output) if cfg.output else None
        self.rows: list[SampleResult] = []
        self.written = 0
        if self.path is None:
            return
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            if cfg.format == "csv":
                with self.path.open("w", newline="") as fh:
                    csv.writer(fh).writerow(self._header())
            else:
                self._write_json(complete=False)
        except OSError as exc:
            raise OSError(f"cannot write output {self.path}: {exc}") from exc

    def _header(self) -> list[str]:
        return ["sample_id", "seed", "systole", "shortest_k"] + [f"count{lab}" for lab in self.cfg.windows.labels()]

    def _counts(self, r: SampleResult) -> list[int]:
        if self.cfg.g == 0:
            return [0] * len(self.cfg.windows)
        out = []
        for rg in self.cfg.windows.ranges(ScalingParams(self.cfg.n, self.cfg.g)):
            out.append(int(((r.lengths >= rg.start) & (r.lengths < rg.stop)).sum()) if len(rg) else 0)
        return out

    def add(self, r: SampleResult) -> None:
        self.rows.append(r)
        if len(self.rows) - self.written >= FLUSH_EVERY:
            self.flush()

    def flush(self, complete: bool = False) -> None:
        if self.path is None:
            return
        if self.cfg.format == "csv":
            with self.path.open("a", newline="") as fh:
                w = csv.writer(fh)
                for r in self.rows[self.written :]:
                    w.writerow([r.sample_id, r.seed, r.systole, r.shortest_k] + self._counts(r))
        else:
            self._write_json(complete)
        self.written = len(self.rows)

    def _write_json(self, complete: bool) -> None:
        data = {
            "config": self.cfg.to_json(),
            "complete": complete,
            "samples": [
                {
                    "sample_id": r.sample_id,
                    "seed": r.seed,
                    "systole": r.systole,
                    "shortest_k": r.shortest_k,
                    "counts": self._counts(r),
                    "truncated": bool(r.truncated),
                    "cycles": [
                        {"len": int(a), "k": int(b), "loop": bool(a == 1)} for a, b in zip(r.lengths, r.junctions)
                    ],
                }
                for r in self.rows
            ],
        }
        tmp = self.path.with_name(self.path.name + ".tmp")
        tmp.write_text(json.dumps(data, separators=(",", ":")))
        os.replace(tmp, self.path)


def run_experiment(cfg: ExperimentConfig, progress: bool = False) -> ExperimentSummary:
    """Run ``cfg.samples`` independent samples and aggregate them.

    With ``cfg.output`` set, per-sample rows are written (CSV or JSON) and
    flushed every 1000 samples.
    """
    workers = cfg.workers or default_workers()
    cap = cfg.cap
    ids = list(range(cfg.samples))
    chunks = [ids[i : i + CHUNK] for i in range(0, len(ids), CHUNK)]
    tasks = [(cfg.n, cfg.g, cap, cfg.include_loops, cfg.master_seed, c) for c in chunks]
    writer = _Writer(cfg)
    done = 0

    def consume(batch):
        nonlocal done
        for r in batch:
            writer.add(r)
        done += len(batch)
        if progress:
            print(f"\r{done}/{cfg.samples} samples", end="", file=sys.stderr, flush=True)

    if workers == 1 or len(chunks) == 1:
        for t in tasks:
            consume(_run_chunk(t))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            # map yields in submission order, so rows stay in sample order
            for batch in pool.map(_run_chunk, tasks):
                consume(batch)
    if progress:
        print(file=sys.stderr)
    writer.flush(complete=True)
    summary = ExperimentSummary.from_results(cfg.n, cfg.g, cfg.windows, writer.rows)
    n_trunc = int(summary.truncated.sum())
    if n_trunc:
        log.warning("%d samples hit the cycle-count guard", n_trunc)
    return summary


def summary_report(summary: ExperimentSummary) -> dict:
    if summary.g == 0:
        return {
            "n": summary.n,
            "g": 0,
            "samples": summary.n_samples,
            "total_cycles": int(summary.window_counts.sum()),
        }
    return summary.report()


def save_summary(summary: ExperimentSummary, path) -> None:
    Path(path).write_text(json.dumps(summary_report(summary), indent=2, default=_jsonable))


def _jsonable(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    raise TypeError(f"not JSON serializable: {type(obj)}")
