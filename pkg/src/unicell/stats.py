"""Limit intensities, limit laws and Poisson goodness-of-fit.

Rescaled cycle lengths ``len / L`` with ``L = sqrt(n / (12 g))`` converge to
a Poisson process with intensity ``(cosh t - 1) / t``. Cycles made of ``k``
tree paths contribute the ``t^(2k-1) / (2k)!`` part of that intensity.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy import stats as sps

PK_ZMAX = 30.0


# ---------------------------------------------------------------------------
# Scaling and windows
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalingParams:
    n: int
    g: int

    def __post_init__(self):
        if self.g < 1 or self.n < 1:
            raise ValueError("need n >= 1 and g >= 1")
        if self.n <= 12 * self.g:
            warnings.warn(f"n={self.n} <= 12 g: scale L is below 1", stacklevel=2)

    @property
    def L(self) -> float:
        return math.sqrt(self.n / (12 * self.g))

    def length_at_least(self, length: int, x) -> bool:
        """Exact test of ``length >= x L``, done as ``12 g length^2 >= x^2 n``."""
        x = Fraction(x)
        return x <= 0 or 12 * self.g * length * length >= x * x * self.n

    def first_length(self, x) -> int:
        """Smallest integer length ``>= x L`` (at least 1)."""
        x = Fraction(x)
        if x <= 0:
            return 1
        ell = max(1, math.isqrt(int(x * x * self.n / (12 * self.g))))
        while ell > 1 and self.length_at_least(ell - 1, x):
            ell -= 1
        while not self.length_at_least(ell, x):
            ell += 1
        return ell

    def window_range(self, x, y) -> range:
        """Integer lengths in ``[x L, y L)``."""
        return range(self.first_length(x), self.first_length(y) if Fraction(y) > 0 else 1)

    def cap(self, x_max) -> int:
        """``ceil(x_max L)``."""
        return self.first_length(x_max)


@dataclass(frozen=True)
class WindowSpec:
    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        object.__setattr__(self, "intervals", tuple((float(a), float(b)) for a, b in self.intervals))
        if not self.intervals:
            raise ValueError("at least one window is required")
        for a, b in self.intervals:
            if not 0 <= a < b:
                raise ValueError(f"bad window [{a}, {b})")
        spans = sorted(self.intervals)
        for (_, b1), (a2, _) in zip(spans, spans[1:]):
            if a2 < b1:
                raise ValueError("windows must be disjoint")

    def __len__(self):
        return len(self.intervals)

    @property
    def upper(self) -> float:
        return max(b for _, b in self.intervals)

    def labels(self) -> list[str]:
        return [f"[{a:g},{b:g})" for a, b in self.intervals]

    def ranges(self, scale: ScalingParams) -> list[range]:
        return [scale.window_range(a, b) for a, b in self.intervals]

    @classmethod
    def parse(cls, text: str) -> "WindowSpec":
        """``"0:1,1:2"`` -> ``[0,1), [1,2)``."""
        out = []
        for part in text.split(","):
            a, _, b = part.partition(":")
            if not b:
                raise ValueError(f"window {part!r} is not of the form a:b")
            out.append((float(a), float(b)))
        return cls(tuple(out))


# ---------------------------------------------------------------------------
# Intensities
# ---------------------------------------------------------------------------


def _even_series(z: float, tol: float) -> float:
    """``sum_{k>=1} z^{2k} / ((2k)(2k)!)``, stopped once the tail is below ``tol``."""
    if z == 0:
        return 0.0
    z2 = z * z
    term = z2 / 4.0  # k = 1
    terms = [term]
    k = 1
    while True:
        ratio = z2 / ((2 * k + 1) * (2 * k + 2)) * (2 * k) / (2 * k + 2)
        term *= ratio
        k += 1
        terms.append(term)
        # later ratios are smaller, so the tail is geometric-dominated
        next_ratio = z2 / ((2 * k + 1) * (2 * k + 2))
        if next_ratio < 1 and term * next_ratio / (1 - next_ratio) < tol:
            break
    return math.fsum(terms)


def intensity(x: float, y: float, tol: float = 1e-15) -> float:
    """``lambda(x, y)`` = integral over ``[x, y]`` of ``(cosh t - 1) / t``."""
    if x < 0 or y < x:
        raise ValueError("need 0 <= x <= y")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if x == y:
        return 0.0
    # sum the differences termwise to avoid cancellation when x is close to y
    x2, y2 = x * x, y * y
    terms = []
    k = 1
    xp, yp = x2, y2
    fact = 2.0  # (2k)!
    while True:
        t = (yp - xp) / (2 * k * fact)
        terms.append(t)
        nr = y2 / ((2 * k + 1) * (2 * k + 2))
        if nr < 1 and abs(t) * nr / (1 - nr) < tol:
            break
        k += 1
        xp *= x2
        yp *= y2
        fact *= (2 * k - 1) * (2 * k)
        if not math.isfinite(fact) or not math.isfinite(yp):
            return _even_series(y, tol) - _even_series(x, tol)
    return math.fsum(terms)


def intensity_k(x: float, y: float, k: int) -> float:
    """``(y^{2k} - x^{2k}) / ((2k) (2k)!)``."""
    if x < 0 or y < x:
        raise ValueError("need 0 <= x <= y")
    if k < 1:
        raise ValueError("k must be >= 1")
    if k <= 80 and y < 1e10:
        den = 2 * k * float(math.factorial(2 * k))
        return (y ** (2 * k) - x ** (2 * k)) / den
    log_den = math.log(2 * k) + math.lgamma(2 * k + 1)
    hi = math.exp(2 * k * math.log(y) - log_den) if y > 0 else 0.0
    lo = math.exp(2 * k * math.log(x) - log_den) if x > 0 else 0.0
    return hi - lo


@lru_cache(maxsize=None)
def _composition_weight(m: int, k: int) -> int:
    """Sum over compositions of ``m`` into ``k`` non-negative parts of ``prod (2 m_i + 1)``.

    This is the coefficient of ``x^m`` in ``((1 + x) / (1 - x)^2)^k``.
    """
    return sum(math.comb(k, i) * math.comb(m - i + 2 * k - 1, 2 * k - 1) for i in range(min(k, m) + 1))


def lambda_k_m_exact(m: int, k: int, M: int) -> Fraction:
    if k < 1 or M < 1 or m < 0:
        raise ValueError("need k >= 1, M >= 1, m >= 0")
    return Fraction(_composition_weight(m, k), 2 * k) / (2 * M * M) ** k


def lambda_k_m(m: int, k: int, M: int) -> float:
    """``Lambda_k(m; M)``: the discretized intensity of k-path cycles in window ``m``."""
    return float(lambda_k_m_exact(m, k, M))


def lambda_k_window_sum(a: int, b: int, k: int, M: int) -> Fraction:
    """``sum_{m=a}^{b-1} Lambda_k(m; M)``, which tends to ``intensity_k(a/M, b/M, k)``."""
    return sum((lambda_k_m_exact(m, k, M) for m in range(a, b)), Fraction(0))


def systole_cdf(z: float) -> float:
    """Limit law of the rescaled shortest cycle: ``1 - exp(-lambda(0, z))``."""
    if z < 0:
        raise ValueError("z must be >= 0")
    return -math.expm1(-intensity(0.0, z))


def _pk_integrand(z: float, k: int) -> float:
    lam = intensity(0.0, z, tol=1e-17)
    if lam > 745:
        return 0.0
    log_poly = (2 * k - 1) * math.log(z) - math.lgamma(2 * k + 1) if z > 0 else -math.inf
    return math.exp(log_poly - lam)


def pk(k: int, tol: float = 1e-10) -> float:
    """Limit probability that the shortest cycle consists of ``k`` tree paths."""
    if k < 1:
        raise ValueError("k must be >= 1")
    # the integrand peaks below z ~ 2k and vanishes beyond z ~ 15; split for quad
    pts = sorted({1.0, 2.0, 4.0, 8.0, min(2.0 * k, 15.0)})
    val, err = integrate.quad(_pk_integrand, 0.0, PK_ZMAX, args=(k,), epsabs=tol, epsrel=0.0, limit=400, points=pts)
    if err > max(tol, 1e-13) * 10:
        raise ArithmeticError(f"pk({k}) quadrature error {err:.2e} above tolerance")
    return val


# ---------------------------------------------------------------------------
# Goodness of fit
# ---------------------------------------------------------------------------

MIN_GOF_SAMPLES = 100


@dataclass
class PoissonReport:
    n_samples: int
    lam: float
    mean: float
    mean_stderr: float
    variance: float
    dispersion: float
    chi2: float
    chi2_df: int
    p_value: float
    bins: list[str]
    observed: list[int]
    expected: list[float]
    factorial2: float  # empirical E[X(X-1)]
    factorial2_stderr: float

    def mean_within(self, target: float, rel: float) -> bool:
        return abs(self.mean - target) <= rel * target

    def dispersion_within(self, lo: float = 0.9, hi: float = 1.1) -> bool:
        return lo <= self.dispersion <= hi

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _poisson_bins(lam: float, n: int) -> list[int]:
    """Upper edges of chi-square bins, starting from ``{0, 1, 2, >=3}``.

    The top bins are merged downwards until every expected count is >= 5.
    """
    edges = [0, 1, 2, 3]  # last bin is ">= 3"
    while len(edges) > 1:
        mass = _bin_masses(lam, edges)
        if min(mass) * n >= 5:
            break
        edges.pop()
    return edges


def _bin_masses(lam: float, edges: list[int]) -> list[float]:
    pmf = [sps.poisson.pmf(j, lam) for j in edges[:-1]]
    return pmf + [sps.poisson.sf(edges[-1] - 1, lam)]


def poisson_gof(counts, lam: float) -> PoissonReport:
    """Compare per-sample counts of one window with Poisson(``lam``)."""
    x = np.asarray(counts, dtype=np.int64).ravel()
    n = x.shape[0]
    if n < MIN_GOF_SAMPLES:
        raise ValueError(f"need at least {MIN_GOF_SAMPLES} samples, got {n}")
    if lam < 0:
        raise ValueError("lam must be >= 0")
    if x.min() < 0:
        raise ValueError("counts must be non-negative")
    mean = float(x.mean())
    var = float(x.var(ddof=1))
    f2 = (x * (x - 1)).astype(float)
    if lam == 0:
        ok = bool(np.all(x == 0))
        return PoissonReport(
            n, 0.0, mean, 0.0, var, 1.0 if ok else math.inf, 0.0, 0, 1.0 if ok else 0.0,
            ["0"], [int(np.sum(x == 0))], [float(n)], float(f2.mean()), 0.0,
        )
    edges = _poisson_bins(lam, n)
    mass = np.array(_bin_masses(lam, edges))
    observed = [int(np.sum(x == j)) for j in edges[:-1]] + [int(np.sum(x >= edges[-1]))]
    expected = mass * n
    labels = [str(j) for j in edges[:-1]] + [f">={edges[-1]}"]
    if len(edges) >= 2:
        chi2 = float(np.sum((np.array(observed) - expected) ** 2 / expected))
        df = len(edges) - 1
        p = float(sps.chi2.sf(chi2, df))
    else:
        chi2, df, p = 0.0, 0, 1.0
    return PoissonReport(
        n_samples=n,
        lam=float(lam),
        mean=mean,
        mean_stderr=math.sqrt(var / n),
        variance=var,
        dispersion=var / mean if mean > 0 else math.inf,
        chi2=chi2,
        chi2_df=df,
        p_value=p,
        bins=labels,
        observed=observed,
        expected=expected.tolist(),
        factorial2=float(f2.mean()),
        factorial2_stderr=float(f2.std(ddof=1) / math.sqrt(n)),
    )


@dataclass
class CovarianceReport:
    covariance: float
    stderr: float

    @property
    def z(self) -> float:
        return self.covariance / self.stderr if self.stderr > 0 else 0.0

    def within(self, sigmas: float = 4.0) -> bool:
        return abs(self.covariance) <= sigmas * self.stderr


def window_covariance(a, b) -> CovarianceReport:
    """Empirical covariance of two windows' counts with a delta-method standard error."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("need two count vectors of equal length")
    n = a.shape[0]
    if n < 2:
        raise ValueError("need at least two samples")
    prod = (a - a.mean()) * (b - b.mean())
    cov = float(prod.sum() / (n - 1))
    return CovarianceReport(cov, float(prod.std(ddof=1) / math.sqrt(n)))


def chi2_against(observed: dict, probability: dict, min_expected: float = 5.0) -> tuple[float, int, float]:
    """Chi-square of observed outcome counts against an exact law.

    Outcomes with small expected count are pooled into one bin (in order of
    increasing probability) until it reaches ``min_expected``. Observed keys
    outside the support make the test fail outright.
    """
    n = sum(observed.values())
    if n == 0:
        raise ValueError("no observations")
    if set(observed) - set(probability):
        return math.inf, 0, 0.0
    keys = sorted(probability, key=lambda key: probability[key])
    obs, exp = [], []
    pool_o, pool_e = 0, 0.0
    for key in keys:
        e = float(probability[key]) * n
        o = observed.get(key, 0)
        if e < min_expected or pool_e:
            pool_o += o
            pool_e += e
            if pool_e >= min_expected:
                obs.append(pool_o)
                exp.append(pool_e)
                pool_o, pool_e = 0, 0.0
        else:
            obs.append(o)
            exp.append(e)
    if pool_e:
        if exp:
            obs[-1] += pool_o
            exp[-1] += pool_e
        else:
            obs.append(pool_o)
            exp.append(pool_e)
    obs_a, exp_a = np.array(obs, float), np.array(exp)
    df = len(exp) - 1
    if df < 1:
        return 0.0, 0, 1.0
    chi2 = float(np.sum((obs_a - exp_a) ** 2 / exp_a))
    return chi2, df, float(sps.chi2.sf(chi2, df))


# ---------------------------------------------------------------------------
# Experiment summaries
# ---------------------------------------------------------------------------

K_TRACK = 3  # per-k counts kept for k = 1..K_TRACK, larger k pooled


@dataclass
class SampleResult:
    sample_id: int
    seed: int
    lengths: np.ndarray
    junctions: np.ndarray
    truncated: bool = False

    @property
    def systole(self) -> int:
        return int(self.lengths[0]) if self.lengths.size else -1

    @property
    def shortest_k(self) -> int:
        return int(self.junctions[0]) if self.lengths.size else -1


@dataclass
class ExperimentSummary:
    """Per-sample outcomes, ordered by sample id.

    ``window_counts[s, w]`` counts cycles of sample ``s`` in window ``w``;
    ``window_k_counts[s, w, j]`` restricts to ``k = j + 1`` (the last slot
    pools ``k > K_TRACK``). ``systole`` is -1 when no cycle is below the cap.
    """

    n: int
    g: int
    windows: WindowSpec
    sample_ids: np.ndarray
    seeds: np.ndarray
    window_counts: np.ndarray
    window_k_counts: np.ndarray
    systole: np.ndarray
    shortest_k: np.ndarray
    truncated: np.ndarray
    profiles: list = field(default_factory=list)

    @property
    def n_samples(self) -> int:
        return int(self.sample_ids.shape[0])

    @property
    def scale(self) -> ScalingParams:
        return ScalingParams(self.n, self.g)

    @classmethod
    def from_results(cls, n: int, g: int, windows: WindowSpec, results: list[SampleResult]) -> "ExperimentSummary":
        results = sorted(results, key=lambda r: r.sample_id)
        nw = len(windows)
        S = len(results)
        wc = np.zeros((S, nw), dtype=np.int64)
        wk = np.zeros((S, nw, K_TRACK + 1), dtype=np.int64)
        ranges = windows.ranges(ScalingParams(n, g)) if g >= 1 else [range(0) for _ in range(nw)]
        for s, r in enumerate(results):
            for w, rg in enumerate(ranges):
                if len(rg) == 0:
                    continue
                sel = (r.lengths >= rg.start) & (r.lengths < rg.stop)
                wc[s, w] = int(sel.sum())
                ks = np.minimum(r.junctions[sel], K_TRACK + 1) - 1
                wk[s, w] = np.bincount(ks, minlength=K_TRACK + 1)
        return cls(
            n, g, windows,
            np.array([r.sample_id for r in results], dtype=np.int64),
            np.array([r.seed for r in results], dtype=np.uint64),
            wc, wk,
            np.array([r.systole for r in results], dtype=np.int64),
            np.array([r.shortest_k for r in results], dtype=np.int64),
            np.array([r.truncated for r in results], dtype=bool),
            [np.stack([r.lengths, r.junctions], axis=1) for r in results],
        )

    def merge(self, other: "ExperimentSummary") -> "ExperimentSummary":
        if (self.n, self.g, self.windows) != (other.n, other.g, other.windows):
            raise ValueError("cannot merge summaries of different experiments")
        ids = np.concatenate([self.sample_ids, other.sample_ids])
        order = np.argsort(ids, kind="stable")
        if np.any(np.diff(ids[order]) == 0):
            raise ValueError("overlapping sample ids")

        def cat(a, b):
            return np.concatenate([a, b])[order]

        profiles = self.profiles + other.profiles
        return ExperimentSummary(
            self.n, self.g, self.windows, ids[order], cat(self.seeds, other.seeds),
            cat(self.window_counts, other.window_counts), cat(self.window_k_counts, other.window_k_counts),
            cat(self.systole, other.systole), cat(self.shortest_k, other.shortest_k),
            cat(self.truncated, other.truncated),
            [profiles[i] for i in order] if len(profiles) == len(ids) else [],
        )

    def systole_ecdf(self, z: float) -> float:
        """Fraction of samples with a cycle of length ``<= z L``."""
        z = Fraction(z)
        # length <= zL  <=>  12 g length^2 <= z^2 n, compared exactly
        ok = [s > 0 and 12 * self.g * s * s <= z * z * self.n for s in self.systole.tolist()]
        return float(np.mean(ok))

    def shortest_k_distribution(self, kmax: int = K_TRACK) -> np.ndarray:
        """Empirical law of the shortest cycle's k, among samples that have a cycle."""
        has = self.shortest_k > 0
        if not has.any():
            return np.zeros(kmax)
        ks = self.shortest_k[has]
        return np.array([(ks == k).mean() for k in range(1, kmax + 1)])

    def gof(self) -> list[PoissonReport]:
        return [poisson_gof(self.window_counts[:, w], intensity(a, b)) for w, (a, b) in enumerate(self.windows.intervals)]

    def report(self) -> dict:
        reports = self.gof() if self.n_samples >= MIN_GOF_SAMPLES else []
        out = {
            "n": self.n,
            "g": self.g,
            "L": self.scale.L,
            "samples": self.n_samples,
            "truncated": int(self.truncated.sum()),
            "windows": [],
        }
        for w, (a, b) in enumerate(self.windows.intervals):
            entry = {
                "window": [a, b],
                "lengths": [self.windows.ranges(self.scale)[w].start, self.windows.ranges(self.scale)[w].stop],
                "mean": float(self.window_counts[:, w].mean()),
                "lambda": intensity(a, b),
                "mean_by_k": {str(k + 1): float(self.window_k_counts[:, w, k].mean()) for k in range(K_TRACK)},
                "lambda_by_k": {str(k): intensity_k(a, b, k) for k in range(1, K_TRACK + 1)},
            }
            if reports:
                entry["gof"] = reports[w].to_json()
            out["windows"].append(entry)
        if len(self.windows) >= 2 and self.n_samples >= 2:
            cov = window_covariance(self.window_counts[:, 0], self.window_counts[:, 1])
            out["covariance_01"] = {"value": cov.covariance, "stderr": cov.stderr}
        out["systole_cdf"] = {
            str(z): {"empirical": self.systole_ecdf(z), "limit": systole_cdf(z)} for z in (0.5, 1.0, 1.5, 2.0)
        }
        dist = self.shortest_k_distribution()
        out["shortest_k"] = {str(k): {"empirical": float(dist[k - 1]), "limit": pk(k)} for k in range(1, K_TRACK + 1)}
        return out
