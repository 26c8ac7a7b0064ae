"""One-mode projection of bank-asset portfolios.

Builds the weighted bank network whose link weights are liquidity-weighted
portfolio overlaps: L = P D^-1 P^T with D the diagonal matrix of market
depths, normalized to [0, 1] and converted to dissimilarities 1 - w.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDataError

#: Maturity buckets recognised by :func:`aggregate_maturity_buckets`.
MATURITY_BUCKETS = ("0M-3M", "3M-2Y", "2Y-10Y+")


@dataclass(frozen=True)
class PortfolioMatrix:
    """Bank x asset-class holdings in EUR. Rows are banks, columns asset classes."""

    banks: list[str]
    assets: list[str]
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.ndim != 2 or v.shape != (len(self.banks), len(self.assets)):
            raise ValueError(f"values shape {v.shape} does not match "
                             f"{len(self.banks)} banks x {len(self.assets)} assets")
        if len(self.banks) < 2:
            raise ValueError("need at least two banks")
        if len(self.assets) < 1:
            raise ValueError("need at least one asset class")
        if len(set(self.banks)) != len(self.banks):
            raise ValueError("bank identifiers must be unique")
        if len(set(self.assets)) != len(self.assets):
            raise ValueError("asset identifiers must be unique")
        if np.any(v < 0.0) or not np.all(np.isfinite(v)):
            raise ValueError("holdings must be finite and nonnegative")


@dataclass(frozen=True)
class OverlapNetwork:
    """Symmetric overlap network derived from a portfolio matrix."""

    banks: list[str]
    lwpo: np.ndarray            # raw overlap matrix L (diagonal retained)
    weights: np.ndarray         # normalized weights w, off-diagonal in [0, 1]
    dissimilarities: np.ndarray  # d = 1 - w off-diagonal, 0 on the diagonal
    depths: np.ndarray          # market depth per retained asset class
    capital: np.ndarray         # total holdings per bank
    assets: list[str] = field(default_factory=list)
    norm_mode: str = "offdiag"
    dropped_assets: list[str] = field(default_factory=list)
    isolated_banks: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class DecileSummary:
    """Deciles of the off-diagonal weight distribution."""

    quantiles: np.ndarray        # 10%, 20%, ..., 90%
    interdecile_range: float     # 90% - 10%
    top_threshold: float         # 90% quantile, backbone cut-off


def market_depths(portfolio: PortfolioMatrix) -> np.ndarray:
    """Market depth of each asset class: total volume held by all banks."""
    return portfolio.values.sum(axis=0)


def drop_zero_depth_assets(portfolio: PortfolioMatrix) -> tuple[PortfolioMatrix, list[str]]:
    """Remove asset classes held by no bank; their depth would divide by zero."""
    depths = market_depths(portfolio)
    keep = depths > 0.0
    dropped = [a for a, k in zip(portfolio.assets, keep) if not k]
    if not dropped:
        return portfolio, []
    warnings.warn(f"removed {len(dropped)} zero-depth asset class(es): {dropped}")
    kept = PortfolioMatrix(
        banks=portfolio.banks,
        assets=[a for a, k in zip(portfolio.assets, keep) if k],
        values=portfolio.values[:, keep],
    )
    return kept, dropped


def lwpo(portfolio: PortfolioMatrix, depths: np.ndarray) -> np.ndarray:
    """Liquidity-weighted portfolio overlap L = P D^-1 P^T, symmetrized exactly."""
    depths = np.asarray(depths, dtype=float)
    if depths.shape != (len(portfolio.assets),):
        raise ValueError(f"expected {len(portfolio.assets)} depths, got {depths.shape}")
    if np.any(depths <= 0.0):
        raise ValueError("all market depths must be positive; drop zero-depth assets first")
    P = portfolio.values
    L = (P / depths) @ P.T
    return (L + L.T) / 2.0


def normalize_weights(L: np.ndarray, mode: str = "offdiag") -> np.ndarray:
    """Scale L into link weights w = L / max L.

    mode 'offdiag' takes the maximum over off-diagonal entries only, so the
    strongest inter-bank link gets weight exactly 1; mode 'all' includes the
    diagonal self-overlaps.
    """
    L = np.asarray(L, dtype=float)
    off = ~np.eye(L.shape[0], dtype=bool)
    if mode == "offdiag":
        m = L[off].max()
    elif mode == "all":
        m = L.max()
    else:
        raise ValueError(f"unknown normalization mode {mode!r}")
    if L[off].max() <= 0.0:
        raise DegenerateDataError("degenerate network: no overlapping portfolios")
    return L / m


def to_dissimilarity(weights: np.ndarray) -> np.ndarray:
    """Affine map to dissimilarities d = 1 - w off-diagonal; d_ii = 0."""
    d = 1.0 - np.asarray(weights, dtype=float)
    np.fill_diagonal(d, 0.0)
    return d


def capital_weights(portfolio: PortfolioMatrix) -> np.ndarray:
    """Per-bank weights proportional to total capital invested, summing to 1."""
    totals = portfolio.values.sum(axis=1)
    grand = totals.sum()
    if grand <= 0.0:
        raise ValueError("all holdings are zero; capital weights undefined")
    return totals / grand


def weight_deciles(weights: np.ndarray) -> DecileSummary:
    """Deciles of the off-diagonal (upper-triangle) weight distribution.

    Quantiles use linear interpolation between order statistics (type 7),
    so reported values are reproducible bit-for-bit.
    """
    w = np.asarray(weights, dtype=float)
    n = w.shape[0]
    if n < 2:
        raise ValueError("need at least two banks")
    vals = w[np.triu_indices(n, k=1)]
    qs = np.quantile(vals, np.arange(1, 10) / 10.0)
    return DecileSummary(quantiles=qs,
                         interdecile_range=float(qs[8] - qs[0]),
                         top_threshold=float(qs[8]))


def backbone_edges(weights: np.ndarray, fraction: float = 0.1) -> list[tuple[int, int]]:
    """The ceil(fraction * n_pairs) heaviest off-diagonal edges, as (i, j) index
    pairs with i < j. Ties at the cut are broken by index order."""
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must lie in (0, 1), got {fraction!r}")
    w = np.asarray(weights, dtype=float)
    iu, ju = np.triu_indices(w.shape[0], k=1)
    order = sorted(range(iu.size), key=lambda k: (-w[iu[k], ju[k]], iu[k], ju[k]))
    count = int(np.ceil(fraction * iu.size))
    return [(int(iu[k]), int(ju[k])) for k in order[:count]]


def aggregate_maturity_buckets(portfolio: PortfolioMatrix,
                               buckets: tuple[str, ...] = MATURITY_BUCKETS) -> PortfolioMatrix:
    """Collapse raw asset columns labelled '<COUNTRY>:<BUCKET>' onto the
    canonical country x maturity-bucket layout, summing duplicates.

    Output columns are ordered country-major (sorted), bucket-minor (given
    bucket order); only (country, bucket) cells present in the input appear.
    """
    seen: dict[tuple[str, str], np.ndarray] = {}
    for label, col in zip(portfolio.assets, portfolio.values.T):
        country, sep, bucket = label.partition(":")
        if not sep or not country:
            raise ValueError(f"asset label {label!r} is not of the form COUNTRY:BUCKET")
        if bucket not in buckets:
            raise ValueError(f"unknown maturity bucket {bucket!r} in {label!r}; "
                             f"expected one of {buckets}")
        key = (country, bucket)
        seen[key] = seen[key] + col if key in seen else col.copy()
    ordered = sorted(seen, key=lambda k: (k[0], buckets.index(k[1])))
    return PortfolioMatrix(
        banks=portfolio.banks,
        assets=[f"{c}:{b}" for c, b in ordered],
        values=np.column_stack([seen[k] for k in ordered]),
    )


def build_network(portfolio: PortfolioMatrix, norm_mode: str = "offdiag") -> OverlapNetwork:
    """Full inference pipeline: depths, overlap, normalization, dissimilarities."""
    kept, dropped = drop_zero_depth_assets(portfolio)
    depths = market_depths(kept)
    L = lwpo(kept, depths)
    w = normalize_weights(L, mode=norm_mode)
    d = to_dissimilarity(w)
    capital = portfolio.values.sum(axis=1)
    isolated = [b for b, c in zip(portfolio.banks, capital) if c == 0.0]
    if isolated:
        warnings.warn(f"{len(isolated)} bank(s) with zero holdings kept as "
                      f"isolated nodes: {isolated}")
    return OverlapNetwork(
        banks=list(portfolio.banks),
        lwpo=L,
        weights=w,
        dissimilarities=d,
        depths=depths,
        capital=capital,
        assets=list(kept.assets),
        norm_mode=norm_mode,
        dropped_assets=dropped,
        isolated_banks=isolated,
    )
