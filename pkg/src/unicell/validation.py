"""Self-check suites run by ``unicell validate``.

Each check yields a ``Check`` with observed and expected values; a suite
passes when all of its checks do.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import stats as sps

from . import oracle
from .cperm import count_cperms, expected_cycle_count, h_recurrence_table, lambda_bound, sample_cperm
from .cycles import enumerate_short_cycles
from .maps import build_underlying_graph, kernelize
from .trees import catalan, count_oriented_paths, marked_pattern_count_formula, sample_plane_tree

SUITES = ("counters", "samplers", "kernel", "lemmas")


@dataclass
class Check:
    name: str
    passed: bool
    observed: object
    expected: object

    def to_json(self) -> dict:
        return {"check": self.name, "pass": bool(self.passed), "observed": _plain(self.observed),
                "expected": _plain(self.expected)}


def _plain(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


def random_instance(rng: np.random.Generator, n_max: int = 40, g_max: int = 5):
    """Uniform (tree, sigma) for a random feasible ``(n, g)`` with ``1 <= g``."""
    n = int(rng.integers(2, n_max + 1))
    g = int(rng.integers(1, min(g_max, n // 2) + 1))
    tree = sample_plane_tree(n, rng)
    sigma = sample_cperm(n + 1, g, rng)
    return tree, sigma


def suite_counters() -> list[Check]:
    out = []
    table = h_recurrence_table(9, 4)
    for n in range(1, 10):
        for g in range(0, (n - 1) // 2 + 1):
            brute = len(oracle.enumerate_cperms(n, g))
            out.append(Check(f"h({n},{g}) vs enumeration", count_cperms(n, g) == brute == table[n][g],
                             count_cperms(n, g), brute))
    for n in range(1, 9):
        trees = oracle.enumerate_plane_trees(n)
        out.append(Check(f"Cat_{n}", len(trees) == catalan(n), len(trees), catalan(n)))
        totals = np.sum([count_oriented_paths(t, n) for t in trees], axis=0)
        for ell in range(1, n + 1):
            T = marked_pattern_count_formula(n, ell)
            out.append(Check(f"T_{{{n},{ell}}}", int(totals[ell]) == T, int(totals[ell]), T))
    return out


def _chi2_uniform(keys: list, support_size: int) -> tuple[float, float]:
    counts = np.array(list(Counter(keys).values()), dtype=float)
    counts = np.concatenate([counts, np.zeros(support_size - counts.size)])
    stat, p = sps.chisquare(counts)
    return float(stat), float(p)


def suite_samplers(draws: int = 20_000, seed: int = 1) -> list[Check]:
    rng = np.random.default_rng(seed)
    out = []
    for n in (3, 5):
        keys = [sample_plane_tree(n, rng).key() for _ in range(draws)]
        stat, p = _chi2_uniform(keys, catalan(n))
        crit = sps.chi2.ppf(0.999, catalan(n) - 1)
        out.append(Check(f"tree sampler n={n} chi2", stat < crit, stat, f"< {crit:.2f}"))
    for n, g in ((5, 1), (7, 2)):
        keys = [sample_cperm(n, g, rng).nontrivial for _ in range(draws)]
        size = count_cperms(n, g)
        stat, p = _chi2_uniform(keys, size)
        crit = sps.chi2.ppf(0.999, size - 1)
        out.append(Check(f"C-permutation sampler ({n},{g}) chi2", stat < crit, stat, f"< {crit:.2f}"))
    return out


def suite_kernel(instances: int = 1000, seed: int = 2) -> list[Check]:
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(instances):
        tree, sigma = random_instance(rng)
        G = build_underlying_graph(tree, sigma)
        cap = tree.n_edges
        fast = enumerate_short_cycles(kernelize(G), cap).records()
        if fast != oracle.naive_cycle_enumeration(G, cap):
            bad += 1
    return [Check(f"kernel vs naive enumeration, {instances} instances", bad == 0, bad, 0)]


LEMMA_SWEEP = ((10**3, 10), (10**4, 30), (10**5, 100))


def suite_lemmas() -> list[Check]:
    out = []
    for n, g in LEMMA_SWEEP:
        e3 = expected_cycle_count(n, g, 3)
        lo = g - Fraction(5 * g * g, n - 6 * g)
        out.append(Check(f"E N_3 in [g - 5g^2/(n-6g), g] at ({n},{g})", lo <= e3 <= g, float(e3),
                         [float(lo), g]))
        for nu in (5, 7, 9, 11):
            if (nu - 1) // 2 > g:
                continue
            e = expected_cycle_count(n, g, nu)
            b = lambda_bound(n, g, nu)
            out.append(Check(f"E N_{nu} <= bound at ({n},{g})", float(e) <= b, float(e), b))
    for n in range(1, 9):
        for l1 in range(1, 3):
            for l2 in range(l1, 3):
                rep = oracle.enumerate_path_pairs_and_unions(n, l1, l2)
                out.append(Check(f"path pairs n={n} ({l1},{l2})", rep.ok,
                                 [rep.disjoint_pairs, rep.union_shapes], [rep.disjoint_bound, rep.union_bound]))
    return out


def run_suite(name: str) -> list[Check]:
    if name == "all":
        return [c for s in SUITES for c in run_suite(s)]
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
    return {"counters": suite_counters, "samplers": suite_samplers, "kernel": suite_kernel,
            "lemmas": suite_lemmas}[name]()

