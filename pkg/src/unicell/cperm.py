"""Permutations whose cycles all have odd length (C-permutations).

Counting is organised around the table ``D[k][g]``: the number of
permutations of ``k`` elements with no fixed point, every cycle odd, and
``k - #cycles == 2 g``. Such permutations have ``2g + 1 <= k <= 3g``, so the
table is small whenever ``g`` is, and

    h(n, g) = |C-perms of n elements with n - 2g cycles| = sum_k C(n, k) D[k][g].

Fixed points are free, which makes the samplers cost O(g^2) per draw instead
of O(n).
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

EXACT = "exact"
LOG = "log"


# ---------------------------------------------------------------------------
# Counting tables
# ---------------------------------------------------------------------------


class CountTable:
    """Lazily grown table of ``D[k][g]`` in exact and log form.

    Built on demand, then only read; one instance per process is shared via
    :func:`default_table`.
    """

    def __init__(self):
        self._exact: list[list[int]] = [[1]]  # _exact[g][k - 2g]
        self._log: list[list[float]] = [[0.0]]

    @property
    def gmax(self) -> int:
        return len(self._exact) - 1

    def _grow(self, g: int) -> None:
        while self.gmax < g:
            gg = self.gmax + 1
            row = []
            lrow = []
            for k in range(2 * gg + 1, 3 * gg + 1):
                total = 0
                terms = []
                for j in range(1, gg + 1):
                    rest = k - 1 - 2 * j
                    sub = self._exact_at(rest, gg - j)
                    if sub:
                        w = math.comb(k - 1, 2 * j) * math.factorial(2 * j)
                        total += w * sub
                        terms.append(_log_comb(k - 1, 2 * j) + math.lgamma(2 * j + 1) + self._log_at(rest, gg - j))
                row.append(total)
                lrow.append(_logsumexp(terms))
            self._exact.append(row)
            self._log.append(lrow)

    def _exact_at(self, k: int, g: int) -> int:
        if g < 0 or g > self.gmax:
            return 0
        i = k - 2 * g - (1 if g else 0)
        row = self._exact[g]
        if g == 0:
            return 1 if k == 0 else 0
        return row[i] if 0 <= i < len(row) else 0

    def _log_at(self, k: int, g: int) -> float:
        if g == 0:
            return 0.0 if k == 0 else -math.inf
        i = k - 2 * g - 1
        row = self._log[g]
        return row[i] if 0 <= i < len(row) else -math.inf

    def derangement_count(self, k: int, g: int) -> int:
        """``D[k][g]`` exactly."""
        self._grow(g)
        return self._exact_at(k, g)

    def log_derangement_count(self, k: int, g: int) -> float:
        self._grow(g)
        return self._log_at(k, g)

    def support(self, n: int, g: int) -> range:
        """Feasible numbers of non-fixed points."""
        if g == 0:
            return range(0, 1)
        return range(2 * g + 1, min(3 * g, n) + 1)

    def h(self, n: int, g: int) -> int:
        if n < 0 or g < 0:
            return 0
        self._grow(g)
        return sum(math.comb(n, k) * self._exact_at(k, g) for k in self.support(n, g))

    def log_h(self, n: int, g: int) -> float:
        if n < 0 or g < 0:
            return -math.inf
        self._grow(g)
        return _logsumexp([_log_comb(n, k) + self._log_at(k, g) for k in self.support(n, g)])


_TABLE = CountTable()


def default_table() -> CountTable:
    return _TABLE


def _log_comb(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def _logsumexp(terms: Sequence[float]) -> float:
    terms = [t for t in terms if t != -math.inf]
    if not terms:
        return -math.inf
    top = max(terms)
    return top + math.log(math.fsum(math.exp(t - top) for t in terms))


def h_recurrence_table(nmax: int, gmax: int) -> list[list[int]]:
    """``h[n][g]`` for ``n <= nmax``, ``g <= gmax`` from the smallest-element
    recurrence ``h(n,g) = sum_j C(n-1,2j) (2j)! h(n-1-2j, g-j)``."""
    h = [[0] * (gmax + 1) for _ in range(nmax + 1)]
    h[0][0] = 1
    for n in range(1, nmax + 1):
        for g in range(gmax + 1):
            total = 0
            for j in range(g + 1):
                rest = n - 1 - 2 * j
                if rest < 0:
                    break
                sub = h[rest][g - j]
                if sub:
                    total += math.comb(n - 1, 2 * j) * math.factorial(2 * j) * sub
            h[n][g] = total
    return h


def count_cperms(n: int, g: int, mode: str = EXACT):
    """``|fsc_{n, n-2g}|``: exact integer, or its natural log in ``"log"`` mode.

    Infeasible ``(n, g)`` (``2g > n - 1``) gives 0 (``-inf`` in log mode).
    """
    if mode == EXACT:
        return _TABLE.h(n, g)
    if mode == LOG:
        return _TABLE.log_h(n, g)
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# Cycle types
# ---------------------------------------------------------------------------


def count_by_cycle_type(x: Mapping[int, int]) -> int:
    """``n! / prod(x_nu! nu^x_nu)``; 0 for anything that is not an odd-cycle type."""
    if any(nu < 1 or nu % 2 == 0 or c < 0 for nu, c in x.items()):
        return 0
    n = sum(nu * c for nu, c in x.items())
    denom = 1
    for nu, c in x.items():
        denom *= math.factorial(c) * nu**c
    return math.factorial(n) // denom


def cycle_types(n: int, g: int) -> list[dict[int, int]]:
    """All odd cycle types on ``n`` elements with ``n - 2g`` cycles."""
    out = []

    def rec(remaining: int, max_part: int, acc: dict[int, int]):
        if remaining == 0:
            used = sum(nu * c for nu, c in acc.items())
            if used <= n:
                x = dict(acc)
                if n - used:
                    x[1] = n - used
                out.append(x)
            return
        for j in range(min(remaining, max_part), 0, -1):
            nu = 2 * j + 1
            acc[nu] = acc.get(nu, 0) + 1
            rec(remaining - j, j, acc)
            acc[nu] -= 1
            if not acc[nu]:
                del acc[nu]

    rec(g, g, {})
    return out


# ---------------------------------------------------------------------------
# The permutation type
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CPermutation:
    """Odd-cycle permutation of ``{1..n}``.

    Only cycles of length >= 3 are stored; every other element is a fixed
    point. Cycles are canonical: each starts at its smallest element and they
    are sorted by that element.
    """

    n: int
    nontrivial: tuple[tuple[int, ...], ...] = ()
    _cycle_of: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        seen = set()
        for cyc in self.nontrivial:
            if len(cyc) % 2 == 0 or len(cyc) < 3:
                raise ValueError(f"cycle {cyc} does not have odd length >= 3")
            for e in cyc:
                if not 1 <= e <= self.n or e in seen:
                    raise ValueError(f"bad element {e} in cycle {cyc}")
                seen.add(e)

    @classmethod
    def from_cycles(cls, n: int, cycles: Iterable[Sequence[int]]) -> "CPermutation":
        cycles = [tuple(c) for c in cycles]
        covered = sum(len(c) for c in cycles)
        if any(len(c) == 1 for c in cycles) and covered != n:
            raise ValueError("cycles do not partition {1..n}")
        return cls(n, _canonical([c for c in cycles if len(c) > 1]))

    @property
    def n_cycles(self) -> int:
        return self.n - sum(len(c) - 1 for c in self.nontrivial)

    @property
    def genus(self) -> int:
        return (self.n - self.n_cycles) // 2

    @property
    def cycles(self) -> list[tuple[int, ...]]:
        """All cycles including fixed points, ordered by smallest element."""
        moved = {e for c in self.nontrivial for e in c}
        out = [(e,) for e in range(1, self.n + 1) if e not in moved]
        out.extend(self.nontrivial)
        out.sort(key=lambda c: c[0])
        return out

    def class_ids(self) -> np.ndarray:
        """Compact class index for elements ``1..n`` (array position ``e - 1``).

        Classes are numbered by increasing smallest element.
        """
        rep = np.arange(self.n, dtype=np.int64)
        for cyc in self.nontrivial:
            idx = np.asarray(cyc, dtype=np.int64) - 1
            rep[idx] = idx.min()
        is_rep = rep == np.arange(self.n)
        compact = np.cumsum(is_rep) - 1
        return compact[rep]

    def cycle_type(self) -> dict[int, int]:
        x: dict[int, int] = {}
        fixed = self.n - sum(len(c) for c in self.nontrivial)
        if fixed:
            x[1] = fixed
        for c in self.nontrivial:
            x[len(c)] = x.get(len(c), 0) + 1
        return x

    def as_array(self) -> np.ndarray:
        """``perm[e - 1] = sigma(e)`` (1-based values)."""
        perm = np.arange(1, self.n + 1, dtype=np.int64)
        for cyc in self.nontrivial:
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                perm[a - 1] = b
        return perm

    def to_json(self) -> list[list[int]]:
        return [list(c) for c in self.cycles]

    @classmethod
    def from_json(cls, data: Sequence[Sequence[int]]) -> "CPermutation":
        n = sum(len(c) for c in data)
        return cls.from_cycles(n, data)


def _canonical(cycles: Iterable[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    out = []
    for c in cycles:
        c = list(c)
        i = c.index(min(c))
        out.append(tuple(c[i:] + c[:i]))
    out.sort(key=lambda c: c[0])
    return tuple(out)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def randbelow(rng: np.random.Generator, bound: int) -> int:
    """Exactly uniform integer in ``[0, bound)`` for arbitrarily large ``bound``."""
    if bound <= 0:
        raise ValueError("bound must be positive")
    if bound == 1:
        return 0
    nbits = (bound - 1).bit_length()
    words = (nbits + 63) // 64
    mask = (1 << nbits) - 1
    while True:
        raw = rng.integers(0, 2**64, size=words, dtype=np.uint64)
        value = 0
        for w in raw.tolist():
            value = (value << 64) | w
        value &= mask
        if value < bound:
            return value


def _choose_exact(rng, weights: Sequence[int]) -> int:
    cum = []
    total = 0
    for w in weights:
        total += w
        cum.append(total)
    u = randbelow(rng, total)
    return bisect.bisect_right(cum, u)


def _choose_log(rng, log_weights: Sequence[float]) -> int:
    top = max(log_weights)
    p = np.exp(np.asarray(log_weights) - top)
    cum = np.cumsum(p)
    return int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))


@lru_cache(maxsize=256)
def _support_weights(n: int, g: int) -> tuple[list[int], list[int]]:
    ks = list(_TABLE.support(n, g))
    return ks, [math.comb(n, k) * _TABLE.derangement_count(k, g) for k in ks]


def _check_feasible(n: int, g: int) -> None:
    if n < 1 or g < 0 or 2 * g > n - 1:
        raise ValueError(f"no C-permutation of {n} elements with genus {g} (need 0 <= 2g <= n-1)")


def _arrange(rng, elements: list[int], g: int, mode: str) -> list[tuple[int, ...]]:
    """Uniform fixed-point-free odd-cycle permutation of ``elements`` with genus ``g``.

    The cycle of the smallest remaining element gets length ``2j + 1`` with
    probability ``C(r-1,2j) (2j)! D[r-1-2j][g-j] / D[r][g]``; its companions
    come from a partial Fisher-Yates shuffle of the remaining pool, whose
    draw order is the cyclic order.
    """
    pool = sorted(elements)
    cycles = []
    gg = g
    while pool:
        r = len(pool)
        js = []
        weights = []
        for j in range(1, gg + 1):
            rest = r - 1 - 2 * j
            if rest < 0:
                break
            if mode == EXACT:
                sub = _TABLE.derangement_count(rest, gg - j)
                if sub:
                    js.append(j)
                    weights.append(math.comb(r - 1, 2 * j) * math.factorial(2 * j) * sub)
            else:
                sub = _TABLE.log_derangement_count(rest, gg - j)
                if sub != -math.inf:
                    js.append(j)
                    weights.append(_log_comb(r - 1, 2 * j) + math.lgamma(2 * j + 1) + sub)
        if not js:
            raise AssertionError("infeasible arrangement state")
        pick = _choose_exact(rng, weights) if mode == EXACT else _choose_log(rng, weights)
        j = js[pick]
        head = pool[0]
        rest = pool[1:]
        for i in range(2 * j):
            t = i + int(rng.integers(0, len(rest) - i))
            rest[i], rest[t] = rest[t], rest[i]
        cycles.append((head, *rest[: 2 * j]))
        pool = sorted(rest[2 * j :])
        gg -= j
    return cycles


def _sample_nontrivial(n: int, g: int, rng, mode: str = EXACT) -> list[tuple[int, ...]]:
    if g == 0:
        return []
    ks, weights = _support_weights(n, g)
    if mode == EXACT:
        k = ks[_choose_exact(rng, weights)]
    elif mode == LOG:
        logw = [_log_comb(n, kk) + _TABLE.log_derangement_count(kk, g) for kk in ks]
        k = ks[_choose_log(rng, logw)]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    moved = (rng.choice(n, size=k, replace=False) + 1).tolist()
    return _arrange(rng, moved, g, mode)


def sample_cperm(n: int, g: int, rng: np.random.Generator, mode: str = EXACT) -> CPermutation:
    """Uniform element of ``fsc_{n, n-2g}``.

    First the number ``k`` of moved elements is drawn with weight
    ``C(n,k) D[k][g]``, then a uniform ``k``-subset, then a uniform
    fixed-point-free arrangement of it. In exact mode every probability is an
    exact ratio of integers; log mode uses float weights (relative error far
    below 1e-9 per step).
    """
    _check_feasible(n, g)
    sigma = CPermutation(n, _canonical(_sample_nontrivial(n, g, rng, mode)))
    if sigma.n_cycles != n - 2 * g:
        raise AssertionError("sampled permutation has the wrong cycle count")
    return sigma


def sample_cperm_sequential(n: int, g: int, rng: np.random.Generator) -> CPermutation:
    """Element-by-element sampler over the full ground set.

    The cycle containing the smallest unassigned element has length ``2j+1``
    with probability ``C(r-1,2j) (2j)! h(r-1-2j, g-j) / h(r, g)``. O(n) steps;
    kept as an independent route to :func:`sample_cperm`.
    """
    _check_feasible(n, g)
    pool = list(range(1, n + 1))
    cycles = []
    gg = g
    while pool:
        r = len(pool)
        js, weights = [], []
        for j in range(0, gg + 1):
            rest = r - 1 - 2 * j
            if rest < 0:
                break
            sub = _TABLE.h(rest, gg - j)
            if sub:
                js.append(j)
                weights.append(math.comb(r - 1, 2 * j) * math.factorial(2 * j) * sub)
        j = js[_choose_exact(rng, weights)]
        head, rest = pool[0], pool[1:]
        for i in range(2 * j):
            t = i + int(rng.integers(0, len(rest) - i))
            rest[i], rest[t] = rest[t], rest[i]
        if j:
            cycles.append((head, *rest[: 2 * j]))
        pool = sorted(rest[2 * j :])
        gg -= j
    return CPermutation(n, _canonical(cycles))


# ---------------------------------------------------------------------------
# Cycle statistics
# ---------------------------------------------------------------------------


def expected_cycle_count(n: int, g: int, nu: int, mode: str = EXACT):
    """Mean number of ``nu``-cycles in a uniform element of ``fsc_{n,n-2g}``.

    ``C(n,nu) (nu-1)! h(n-nu, g-(nu-1)/2) / h(n,g)``; a Fraction in exact
    mode, a float in log mode.
    """
    if nu < 1 or nu % 2 == 0:
        raise ValueError("nu must be odd and positive")
    half = (nu - 1) // 2
    if half > g or nu > n:
        return Fraction(0) if mode == EXACT else 0.0
    if mode == EXACT:
        num = math.comb(n, nu) * math.factorial(nu - 1) * _TABLE.h(n - nu, g - half)
        return Fraction(num, _TABLE.h(n, g))
    log_num = _log_comb(n, nu) + math.lgamma(nu) + _TABLE.log_h(n - nu, g - half)
    return math.exp(log_num - _TABLE.log_h(n, g))


def lambda_bound(n: int, g: int, nu: int) -> float:
    """``(3g)^((nu-1)/2) / (nu (n-3g)^((nu-3)/2))``, valid for ``g < n/3``."""
    if not 3 * g < n:
        raise ValueError("lambda_bound needs g < n/3")
    if nu < 3 or nu % 2 == 0:
        raise ValueError("nu must be odd and >= 3")
    k = (nu - 1) // 2
    return (3 * g) ** k / (nu * (n - 3 * g) ** (k - 1))


def pairing_lambda(n: int, g: int) -> float:
    """``6g ((1 - 3g/n) / (1 - 6g/n))^2``."""
    return 6 * g * ((1 - 3 * g / n) / (1 - 6 * g / n)) ** 2


@dataclass(frozen=True)
class PairingEstimate:
    n: int
    g: int
    r: int
    samples: int
    hits: int
    estimate: float
    stderr: float
    asymptotic: float  # (6g/n^2)^r
    bound: float  # Lambda^r / (n)_{2r}
    absolute_bound: float  # (2200 g / n^2)^r

    def within_bound(self, sigmas: float = 4.0) -> bool:
        return self.estimate <= self.absolute_bound + sigmas * self.stderr


def _pairing_event(cycles: list[tuple[int, ...]], r: int) -> bool:
    where = {}
    for idx, cyc in enumerate(cycles):
        for e in cyc:
            if e <= 2 * r:
                where[e] = idx
    used = set()
    for i in range(1, r + 1):
        a = where.get(2 * i - 1)
        if a is None or a != where.get(2 * i) or a in used:
            return False
        used.add(a)
    return True


def pairing_probability(n: int, g: int, r: int, samples: int, rng: np.random.Generator) -> PairingEstimate:
    """Monte Carlo estimate of P(2i-1 and 2i share a cycle for all i <= r,
    the r cycles being distinct)."""
    if 2 * r > n or r < 1:
        raise ValueError("need 1 <= r <= n/2")
    _check_feasible(n, g)
    hits = 0
    if g > 0:
        for _ in range(samples):
            if _pairing_event(_sample_nontrivial(n, g, rng), r):
                hits += 1
    p = hits / samples
    stderr = math.sqrt(max(p * (1 - p), 1.0 / samples) / samples)
    falling = math.prod(range(n - 2 * r + 1, n + 1))
    lam = pairing_lambda(n, g) if 7 * g <= n else math.inf
    return PairingEstimate(
        n=n,
        g=g,
        r=r,
        samples=samples,
        hits=hits,
        estimate=p,
        stderr=stderr,
        asymptotic=(6 * g / n**2) ** r,
        bound=lam**r / falling,
        absolute_bound=(2200 * g / n**2) ** r,
    )


def exact_pairing_probability(n: int, g: int) -> Fraction:
    """P(1 and 2 share a cycle) = sum_nu nu(nu-1) E[N_nu] / (n(n-1))."""
    total = Fraction(0)
    for nu in range(3, 2 * g + 2, 2):
        total += nu * (nu - 1) * expected_cycle_count(n, g, nu)
    return total / (n * (n - 1))


def mixed_factorial_moment(
    n: int, g: int, alpha: Mapping[int, int], samples: int, rng: np.random.Generator
) -> tuple[float, float]:
    """Monte Carlo mean and standard error of ``prod_nu (N_nu)_{alpha_nu}``."""
    vals = np.empty(samples)
    for s in range(samples):
        counts: dict[int, int] = {}
        for cyc in _sample_nontrivial(n, g, rng):
            counts[len(cyc)] = counts.get(len(cyc), 0) + 1
        v = 1
        for nu, a in alpha.items():
            c = counts.get(nu, 0)
            v *= math.prod(range(c - a + 1, c + 1)) if a else 1
        vals[s] = v
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(samples))


def mixed_moment_bound(n: int, g: int, alpha: Mapping[int, int]) -> float:
    return math.prod(lambda_bound(n, g, nu) ** a for nu, a in alpha.items())
