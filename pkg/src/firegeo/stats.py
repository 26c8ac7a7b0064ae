"""Statistical tests on embedded coordinates.

Radial coordinates are compared across label groups with a two-sided
Wilcoxon-Mann-Whitney test; angular coordinates across groups with the
Watson-Williams high-concentration F test; longitudinal association uses
Pearson's correlation for radii and the Jammalamadaka-SenGupta circular
correlation coefficient for angles.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import f as f_dist
from scipy.stats import rankdata
from scipy.stats import t as t_dist

from .errors import DegenerateDataError

#: Combined sample size up to which the exact Mann-Whitney null is enumerated.
EXACT_ENUMERATION_LIMIT = 12
#: Pooled mean resultant length below which the high-concentration assumption
#: of the Watson-Williams test is doubtful.
CONCENTRATION_WARN_LEVEL = 0.7


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    method: str
    n_effective: tuple[int, ...]

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p-value out of range: {self.p_value!r}")


@dataclass(frozen=True)
class BankCoordinate:
    """Centered polar coordinates of one bank in one year."""

    bank_id: str
    r_prime: float
    theta_prime: float


@dataclass(frozen=True)
class BankAnnotation:
    bank_id: str
    gsib: bool
    region: str


@dataclass(frozen=True)
class MatchedSamples:
    """Inner join of two yearly samples on bank identifier."""

    banks: list[str]
    coords_a: list[BankCoordinate]
    coords_b: list[BankCoordinate]
    dropped_a: list[str]
    dropped_b: list[str]

    @property
    def count(self) -> int:
        return len(self.banks)


def _norm_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def wilcoxon_mann_whitney(values_a: Sequence[float], values_b: Sequence[float],
                          method: str = "auto") -> TestResult:
    """Two-sided rank test for a location difference between two groups.

    The statistic is U of the first group (midranks for ties). For combined
    n <= 12 without ties the two-sided p is exact, from enumeration of all
    group assignments; otherwise it comes from the normal approximation with
    tie-corrected variance and continuity correction. ``method`` forces a
    path ('exact' or 'normal') instead of the automatic choice.
    """
    a = np.asarray(values_a, dtype=float)
    b = np.asarray(values_b, dtype=float)
    na, nb = a.size, b.size
    if na == 0 or nb == 0:
        raise ValueError("both groups must be non-empty")
    pooled = np.concatenate([a, b])
    n = na + nb
    ranks = rankdata(pooled)
    u_a = float(ranks[:na].sum() - na * (na + 1) / 2.0)
    has_ties = np.unique(pooled).size < n
    if method == "auto":
        method = "exact" if (n <= EXACT_ENUMERATION_LIMIT and not has_ties) else "normal"
    if method == "exact":
        if has_ties:
            raise ValueError("exact enumeration requires tie-free samples")
        p = _exact_mwu_two_sided_p(u_a, na, nb)
        return TestResult(u_a, p, "mann-whitney-exact", (na, nb))
    if method != "normal":
        raise ValueError(f"unknown method {method!r}")
    mu = na * nb / 2.0
    tie_counts = np.unique(pooled, return_counts=True)[1]
    tie_term = float(np.sum(tie_counts**3 - tie_counts)) / (n * (n - 1))
    sigma_sq = na * nb / 12.0 * ((n + 1) - tie_term)
    if sigma_sq <= 0.0:
        return TestResult(u_a, 1.0, "mann-whitney-normal", (na, nb))
    diff = u_a - mu
    z = (diff - 0.5 * np.sign(diff)) / math.sqrt(sigma_sq)
    p = min(1.0, 2.0 * _norm_sf(abs(z)))
    return TestResult(u_a, p, "mann-whitney-normal", (na, nb))


def _exact_mwu_two_sided_p(u_obs: float, na: int, nb: int) -> float:
    """P(|U - mu| >= |u_obs - mu|) under the exact permutation null (no ties)."""
    n = na + nb
    mu = na * nb / 2.0
    threshold = abs(u_obs - mu) - 1e-12
    offset = na * (na + 1) / 2.0
    hits = total = 0
    for combo in itertools.combinations(range(1, n + 1), na):
        u = sum(combo) - offset
        total += 1
        if abs(u - mu) >= threshold:
            hits += 1
    return hits / total


def pearson_correlation(x: Sequence[float], y: Sequence[float]) -> TestResult:
    """Sample Pearson correlation with a two-sided t test on n - 2 degrees of freedom."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 3:
        raise ValueError("need two equal-length samples with n >= 3")
    n = x.size
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(np.sum(xc * xc))
    syy = float(np.sum(yc * yc))
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateDataError("degenerate sample: zero variance")
    r = float(np.sum(xc * yc) / np.sqrt(sxx * syy))
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        p = 0.0
    else:
        t_stat = r * math.sqrt((n - 2) / (1.0 - r * r))
        p = 2.0 * float(t_dist.sf(abs(t_stat), n - 2))
    return TestResult(r, min(1.0, p), "pearson", (n,))


def circular_mean(angles: np.ndarray) -> float:
    """Direction of the resultant vector, in [0, 2*pi)."""
    angles = np.asarray(angles, dtype=float)
    return float(math.atan2(np.sin(angles).sum(), np.cos(angles).sum()) % (2.0 * math.pi))


def _resultant_length(angles: np.ndarray) -> float:
    """Length (not mean length) of the resultant vector."""
    return float(math.hypot(np.cos(angles).sum(), np.sin(angles).sum()))


def von_mises_kappa(rbar: float) -> float:
    """Concentration estimate from a mean resultant length (standard inversion)."""
    if rbar < 0.53:
        return 2.0 * rbar + rbar**3 + 5.0 * rbar**5 / 6.0
    if rbar < 0.85:
        return -0.4 + 1.39 * rbar + 0.43 / (1.0 - rbar)
    denom = rbar**3 - 4.0 * rbar**2 + 3.0 * rbar
    return math.inf if denom <= 0.0 else 1.0 / denom


def watson_williams_f(angles: Sequence[float], groups: Sequence) -> tuple[float, tuple[int, int]]:
    """Corrected Watson-Williams F statistic and its degrees of freedom."""
    angles = np.asarray(angles, dtype=float)
    labels = np.asarray(groups)
    uniq = np.unique(labels)
    q = uniq.size
    n_total = angles.size
    if q < 2:
        raise ValueError("need at least two groups")
    r_within = 0.0
    for g in uniq:
        members = angles[labels == g]
        if members.size < 2:
            raise ValueError(f"group {g!r} has fewer than two observations")
        r_within += _resultant_length(members)
    r_total = _resultant_length(angles)
    rbar = r_within / n_total
    kappa = von_mises_kappa(rbar)
    beta = 1.0 + 3.0 / (8.0 * kappa) if math.isfinite(kappa) else 1.0
    between = r_within - r_total
    within = n_total - r_within
    # Both terms vanish when every group is perfectly concentrated.
    if between <= 1e-12 * n_total:
        f_stat = 0.0
    elif within <= 1e-12 * n_total:
        f_stat = math.inf
    else:
        f_stat = beta * (n_total - q) * between / ((q - 1) * within)
    return f_stat, (q - 1, n_total - q)


def circular_anova(angles: Sequence[float], groups: Sequence) -> TestResult:
    """Watson-Williams test for equality of mean directions across groups.

    Assumes high within-group concentration; a warning is emitted when the
    pooled mean resultant length falls below 0.7.
    """
    angles = np.asarray(angles, dtype=float)
    labels = np.asarray(groups)
    f_stat, (df1, df2) = watson_williams_f(angles, labels)
    sizes = tuple(int(np.sum(labels == g)) for g in np.unique(labels))
    rbar = sum(_resultant_length(angles[labels == g]) for g in np.unique(labels)) / angles.size
    if rbar < CONCENTRATION_WARN_LEVEL:
        warnings.warn(f"mean resultant length {rbar:.3f} < {CONCENTRATION_WARN_LEVEL}; "
                      "high-concentration assumption doubtful")
    if math.isinf(f_stat):
        p = 0.0
    elif f_stat == 0.0:
        p = 1.0
    else:
        p = float(f_dist.sf(f_stat, df1, df2))
    return TestResult(f_stat, p, "watson-williams", sizes)


def circular_correlation(theta_a: Sequence[float], theta_b: Sequence[float]) -> TestResult:
    """Jammalamadaka-SenGupta circular correlation with asymptotic normal p-value."""
    a = np.asarray(theta_a, dtype=float)
    b = np.asarray(theta_b, dtype=float)
    if a.shape != b.shape or a.size < 3:
        raise ValueError("need two equal-length angle samples with n >= 3")
    n = a.size
    sa = np.sin(a - circular_mean(a))
    sb = np.sin(b - circular_mean(b))
    saa = float(np.sum(sa * sa))
    sbb = float(np.sum(sb * sb))
    if saa == 0.0 or sbb == 0.0:
        raise DegenerateDataError("degenerate circular sample: no angular dispersion")
    rho = float(np.sum(sa * sb)) / math.sqrt(saa * sbb)
    rho = max(-1.0, min(1.0, rho))
    lam20 = saa / n
    lam02 = sbb / n
    lam22 = float(np.sum(sa * sa * sb * sb)) / n
    if lam22 <= 0.0:
        return TestResult(rho, 1.0, "circular-correlation", (n,))
    z = math.sqrt(n * lam20 * lam02 / lam22) * rho
    p = min(1.0, 2.0 * _norm_sf(abs(z)))
    return TestResult(rho, p, "circular-correlation", (n,))


def radial_ranking(coords: Sequence[BankCoordinate]) -> list[BankCoordinate]:
    """Banks ordered by increasing radial coordinate (most central first);
    ties broken lexicographically by bank identifier."""
    if not coords:
        raise ValueError("no coordinates to rank")
    return sorted(coords, key=lambda c: (c.r_prime, c.bank_id))


def match_samples(year_a: Sequence[BankCoordinate],
                  year_b: Sequence[BankCoordinate]) -> MatchedSamples:
    """Inner join of two yearly coordinate sets on bank identifier."""
    by_id_a = {c.bank_id: c for c in year_a}
    by_id_b = {c.bank_id: c for c in year_b}
    common = sorted(by_id_a.keys() & by_id_b.keys())
    if not common:
        raise DegenerateDataError("no common banks between the two samples")
    return MatchedSamples(
        banks=common,
        coords_a=[by_id_a[k] for k in common],
        coords_b=[by_id_b[k] for k in common],
        dropped_a=sorted(by_id_a.keys() - by_id_b.keys()),
        dropped_b=sorted(by_id_b.keys() - by_id_a.keys()),
    )
