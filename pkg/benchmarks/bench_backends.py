"""Time the numba kernels against the numpy fallback.

Each backend runs in its own interpreter because the backend flag is read
at import time. Usage::

    python benchmarks/bench_backends.py --n 100000 --g 30 --reps 5
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from unicell._accel import BACKEND
from unicell.maps import build_underlying_graph, kernelize
from unicell.cperm import sample_cperm
from unicell.cycles import enumerate_short_cycles
from unicell.stats import ScalingParams
from unicell.trees import PlaneTree, count_oriented_paths, sample_plane_tree

n, g, reps = map(int, sys.argv[1:4])
cap = ScalingParams(n, g).cap(2.0)
rng = np.random.default_rng(0)
stages = {"tree_parse": 0.0, "path_count_l12": 0.0, "kernelize": 0.0, "cycles": 0.0}
digest = []

def timed(key, fn, *a, **kw):
    t = time.perf_counter()
    out = fn(*a, **kw)
    if rep > 0:  # round 0 is untimed so numba compilation is excluded
        stages[key] += time.perf_counter() - t
    return out

for rep in range(reps + 1):
    tree = sample_plane_tree(n, rng)
    sigma = sample_cperm(n + 1, g, rng)
    t = timed("tree_parse", PlaneTree, tree.word, check=False)
    paths = timed("path_count_l12", count_oriented_paths, t, 12)
    G = build_underlying_graph(t, sigma)
    K = timed("kernelize", kernelize, G)
    cl = timed("cycles", enumerate_short_cycles, K, cap)
    digest.append([int(paths.sum()), K.n_vertices, cl.lengths.tolist()])
print(json.dumps({"backend": BACKEND, "per_rep": {k: v / reps for k, v in stages.items()}, "digest": digest}))
"""


def run_backend(disable: bool, n: int, g: int, reps: int) -> dict:
    env = dict(os.environ, UNICELL_DISABLE_NUMBA="1" if disable else "0")
    proc = subprocess.run(
        [sys.executable, "-c", WORKER, str(n), str(g), str(reps)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(proc.stdout)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--g", type=int, default=30)
    p.add_argument("--reps", type=int, default=5)
    args = p.parse_args(argv)

    fast = run_backend(False, args.n, args.g, args.reps)
    slow = run_backend(True, args.n, args.g, args.reps)
    print(f"n={args.n} g={args.g} reps={args.reps} (seconds per map)")
    print(f"{'stage':<16}{fast['backend']:>12}{slow['backend']:>12}{'speedup':>10}")
    for stage, t_fast in fast["per_rep"].items():
        t_slow = slow["per_rep"][stage]
        print(f"{stage:<16}{t_fast:>12.4f}{t_slow:>12.4f}{t_slow / max(t_fast, 1e-9):>10.1f}")
    same = fast["digest"] == slow["digest"]
    print(f"outputs identical: {same}")
    return 0 if same else 1


if __name__ == "__main__":
    sys.exit(main())
