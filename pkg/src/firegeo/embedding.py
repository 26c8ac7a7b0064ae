"""Stress-minimizing embeddings into Euclidean and hyperbolic space.

The common objective is the stress functional

    Stress(x^1..x^n) = sqrt( 1/(n(n-1)) * sum_{i != j} (d_ij - dist(x^i, x^j))^2 ),

a root-mean-square error over ordered node pairs between target
dissimilarities and geodesic distances in the model space. The Euclidean
baseline is classical MDS (double centering + eigendecomposition); the
hyperbolic embedder uses a spectral initialization on the cosh-transformed
dissimilarity matrix followed by first-order stress descent on the
hyperboloid, with the constraint eliminated via x0 = sqrt(1 + |x_bar|^2).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial.distance import pdist, squareform

#: Minkowski products below 1 + this are treated as coincident pairs.
NEAR_COINCIDENT = 1e-12
#: Cap on the arcosh derivative 1/sqrt(u^2 - 1) near coincident pairs.
GRAD_CAP = 1e6
#: Distance substituted for coincident pairs inside the gradient.
COINCIDENT_DIST = 1e-6

_MIN_STEP = 1e-18


@dataclass(frozen=True)
class DissimilarityMatrix:
    """Symmetric nonnegative target dissimilarities with zero diagonal."""

    labels: list[str]
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        n = len(self.labels)
        if v.shape != (n, n):
            raise ValueError(f"values shape {v.shape} does not match {n} labels")
        if n < 3:
            raise ValueError("need at least three nodes")
        if not np.array_equal(v, v.T):
            raise ValueError("dissimilarity matrix must be exactly symmetric")
        if np.any(np.diag(v) != 0.0):
            raise ValueError("diagonal must be zero")
        if np.any(v < 0.0) or not np.all(np.isfinite(v)):
            raise ValueError("entries must be finite and nonnegative")

    @property
    def n(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class OptimizerOptions:
    max_iter: int = 2000
    tol: float = 1e-8
    seed: int = 0
    restarts: int = 1
    curvature: float = -1.0

    def __post_init__(self):
        if self.curvature != -1.0:
            raise ValueError("only curvature -1 (unit hyperboloid) is supported")
        if self.max_iter < 1 or self.tol <= 0.0 or self.restarts < 1:
            raise ValueError("max_iter and restarts must be >= 1, tol > 0")


@dataclass(frozen=True)
class EuclideanEmbedding:
    points: np.ndarray
    stress: float


@dataclass(frozen=True)
class HyperboloidEmbedding:
    points: np.ndarray      # n x (dim + 1), rows on the unit hyperboloid
    stress: float
    iterations: int = 0
    converged: bool = False

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", p)
        q = p[:, 0] ** 2 - np.sum(p[:, 1:] ** 2, axis=1)
        if np.any(np.abs(q - 1.0) > 1e-9 * np.maximum(1.0, p[:, 0] ** 2)):
            raise ValueError("points violate the hyperboloid constraint")
        if self.stress < 0.0:
            raise ValueError("stress must be nonnegative")

    @property
    def dim(self) -> int:
        return self.points.shape[1] - 1


def _hyperboloid_distances(points: np.ndarray) -> np.ndarray:
    x0 = points[:, 0]
    u = np.outer(x0, x0) - points[:, 1:] @ points[:, 1:].T
    d = np.arccosh(np.maximum(u, 1.0))
    np.fill_diagonal(d, 0.0)
    return d


def _euclidean_distances(points: np.ndarray) -> np.ndarray:
    return squareform(pdist(points))


def stress(points: np.ndarray, dissim: np.ndarray | DissimilarityMatrix,
           metric: str = "hyperbolic") -> float:
    """Evaluate the stress functional of an embedding against target dissimilarities."""
    D = dissim.values if isinstance(dissim, DissimilarityMatrix) else np.asarray(dissim, dtype=float)
    points = np.asarray(points, dtype=float)
    n = D.shape[0]
    if points.shape[0] != n:
        raise ValueError(f"{points.shape[0]} points but {n}x{n} dissimilarities")
    if metric == "hyperbolic":
        dists = _hyperboloid_distances(points)
    elif metric == "euclidean":
        dists = _euclidean_distances(points)
    else:
        raise ValueError(f"unknown metric {metric!r}")
    diff = D - dists
    np.fill_diagonal(diff, 0.0)
    return float(np.sqrt(np.sum(diff * diff) / (n * (n - 1))))


def _lift(spatial: np.ndarray) -> np.ndarray:
    """Attach x0 = sqrt(1 + |x_bar|^2) to spatial coordinates."""
    x0 = np.sqrt(1.0 + np.sum(spatial * spatial, axis=1))
    return np.column_stack([x0, spatial])


def _hyperbolic_stress_sq_grad(spatial: np.ndarray, D: np.ndarray) -> np.ndarray:
    """Gradient of the squared stress with respect to the spatial coordinates.

    Uses d arcosh(u)/du = 1/sqrt(u^2 - 1), capped for near-coincident pairs;
    there the pair distance is replaced by a small positive constant so the
    pull between coincident points stays finite.
    """
    n = spatial.shape[0]
    x0 = np.sqrt(1.0 + np.sum(spatial * spatial, axis=1))
    u = np.outer(x0, x0) - spatial @ spatial.T
    delta = np.arccosh(np.maximum(u, 1.0))
    g = 1.0 / np.sqrt(np.maximum(u * u - 1.0, 1.0 / GRAD_CAP**2))
    delta = np.where(u < 1.0 + NEAR_COINCIDENT, COINCIDENT_DIST, delta)
    W = (delta - D) * g
    np.fill_diagonal(W, 0.0)
    _check_finite_pairs(W)
    scale = 4.0 / (n * (n - 1))
    return scale * (((W @ x0) / x0)[:, None] * spatial - W @ spatial)


def _euclidean_stress_sq_grad(points: np.ndarray, D: np.ndarray) -> np.ndarray:
    n = points.shape[0]
    dists = _euclidean_distances(points)
    q = (dists - D) / np.maximum(dists, COINCIDENT_DIST)
    np.fill_diagonal(q, 0.0)
    _check_finite_pairs(q)
    scale = 4.0 / (n * (n - 1))
    return scale * (q.sum(axis=1)[:, None] * points - q @ points)


def _check_finite_pairs(pair_terms: np.ndarray) -> None:
    if np.all(np.isfinite(pair_terms)):
        return
    bad = np.argwhere(~np.isfinite(pair_terms))
    pairs = [tuple(map(int, ij)) for ij in bad[:5]]
    raise ValueError(f"non-finite gradient; offending pairs (first 5): {pairs}")


def _descend(params: np.ndarray, D: np.ndarray, value_fn, grad_fn, opts: OptimizerOptions):
    """Adaptive-step gradient descent: halve the step on increase, grow by 1.05
    on decrease; stop when the relative stress decrease drops below opts.tol."""
    value = value_fn(params)
    step = 1.0
    iterations = 0
    converged = False
    for _ in range(opts.max_iter):
        grad = grad_fn(params, D)
        if not np.any(grad):
            converged = True
            break
        accepted = False
        while step >= _MIN_STEP:
            trial = params - step * grad
            trial_value = value_fn(trial)
            if trial_value < value:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            converged = True
            break
        iterations += 1
        rel_drop = (value - trial_value) / max(value, np.finfo(float).tiny)
        params, value = trial, trial_value
        step *= 1.05
        if rel_drop < opts.tol or value == 0.0:
            converged = True
            break
    return params, value, iterations, converged


def embed_euclidean(dissim: DissimilarityMatrix, dim: int,
                    opts: OptimizerOptions | None = None,
                    refine: bool = True) -> EuclideanEmbedding:
    """Classical MDS baseline, optionally refined by the same first-order
    stress descent used on the hyperbolic side (so stress comparisons between
    the two geometries reflect equal optimization effort)."""
    n = dissim.n
    if not 1 <= dim <= n - 1:
        raise ValueError(f"dim must lie in [1, {n - 1}], got {dim}")
    D = dissim.values
    J = np.eye(n) - np.ones((n, n)) / n
    B = -0.5 * J @ (D * D) @ J
    evals, evecs = np.linalg.eigh(B)
    top_vals = evals[::-1][:dim]
    top_vecs = evecs[:, ::-1][:, :dim]
    if np.any(top_vals < 0.0):
        warnings.warn(f"classical MDS: {int(np.sum(top_vals < 0.0))} negative "
                      "eigenvalue(s) truncated to zero")
    X = top_vecs * np.sqrt(np.maximum(top_vals, 0.0))
    if refine:
        X, value, _, _ = _descend(
            X, D,
            lambda p: stress(p, D, metric="euclidean"),
            _euclidean_stress_sq_grad,
            opts or OptimizerOptions(),
        )
    else:
        value = stress(X, D, metric="euclidean")
    return EuclideanEmbedding(points=X, stress=value)


def spectral_init_hyperbolic(dissim: DissimilarityMatrix, dim: int) -> HyperboloidEmbedding:
    """Strain-based initialization on the hyperboloid.

    Forms A = cosh(d_ij) (whose exact decomposition has one positive and dim
    negative eigenvalues when d is realizable on the dim-hyperboloid), reads
    x0 off the top eigenvector and the spatial coordinates off the most
    negative eigenpairs, then rescales each row onto the hyperboloid.
    """
    n = dissim.n
    if not 1 <= dim <= n - 1:
        raise ValueError(f"dim must lie in [1, {n - 1}], got {dim}")
    A = np.cosh(dissim.values)
    np.fill_diagonal(A, 1.0)
    evals, evecs = np.linalg.eigh(A)
    v = evecs[:, -1]
    if v.sum() < 0.0:
        v = -v
    x0 = np.maximum(v * np.sqrt(max(evals[-1], 1.0)), 1.0)
    spatial = evecs[:, :dim] * np.sqrt(np.maximum(-evals[:dim], 0.0))
    norms = np.linalg.norm(spatial, axis=1)
    target = np.sqrt(np.maximum(x0 * x0 - 1.0, 0.0))
    nonzero = norms > 0.0
    spatial[nonzero] *= (target[nonzero] / norms[nonzero])[:, None]
    spatial[~nonzero] = 0.0
    x0 = np.where(nonzero, x0, 1.0)
    points = np.column_stack([x0, spatial])
    return HyperboloidEmbedding(points=points,
                                stress=stress(points, dissim.values, metric="hyperbolic"))


def descend_stress(init: HyperboloidEmbedding, dissim: DissimilarityMatrix,
                   opts: OptimizerOptions | None = None) -> HyperboloidEmbedding:
    """First-order stress minimization on the hyperboloid starting from ``init``.

    The constraint is eliminated by optimizing the spatial coordinates only;
    accepted steps never increase the stress.
    """
    opts = opts or OptimizerOptions()
    D = dissim.values
    spatial, value, iterations, converged = _descend(
        init.points[:, 1:].copy(), D,
        lambda p: stress(_lift(p), D, metric="hyperbolic"),
        _hyperbolic_stress_sq_grad,
        opts,
    )
    return HyperboloidEmbedding(points=_lift(spatial), stress=value,
                                iterations=iterations, converged=converged)


def embed_hyperbolic(dissim: DissimilarityMatrix, dim: int = 2,
                     opts: OptimizerOptions | None = None) -> HyperboloidEmbedding:
    """Spectral initialization plus stress descent; with opts.restarts > 1 the
    initialization is perturbed (seeded) and the best stress is kept."""
    opts = opts or OptimizerOptions()
    init = spectral_init_hyperbolic(dissim, dim)
    best = descend_stress(init, dissim, opts)
    if opts.restarts > 1:
        rng = np.random.default_rng(opts.seed)
        sigma = 0.1 * max(1.0, float(np.abs(init.points[:, 1:]).max()))
        for _ in range(opts.restarts - 1):
            spatial = init.points[:, 1:] + rng.normal(0.0, sigma, size=init.points[:, 1:].shape)
            perturbed = replace(init, points=_lift(spatial),
                                stress=stress(_lift(spatial), dissim.values, metric="hyperbolic"))
            candidate = descend_stress(perturbed, dissim, opts)
            if candidate.stress < best.stress:
                best = candidate
    return best
