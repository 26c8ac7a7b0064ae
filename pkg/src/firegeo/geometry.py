"""Hyperboloid-model primitives.

Points of d-dimensional hyperbolic space (curvature -1) are represented as
numpy vectors (x0, x1, ..., xd) on the upper sheet x0^2 - x1^2 - ... - xd^2 = 1,
x0 >= 1. All operations are pure functions on immutable inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi

#: Relative tolerance for the hyperboloid constraint check.
CONSTRAINT_TOL = 1e-9


class PoincarePolar(NamedTuple):
    """Polar coordinates (r, theta) in the Poincare disc, r in [0, 1), theta in [0, 2*pi)."""

    r: float
    theta: float


@dataclass(frozen=True)
class HyperbolicCenter:
    """Weighted hyperbolic mean of a point cloud and the Minkowski norm of the
    raw Euclidean mean ('resultant length', a dispersion measure >= 1)."""

    mean: np.ndarray
    resultant_length: float


def apex(dim: int = 2) -> np.ndarray:
    """The point (1, 0, ..., 0), origin of the hyperboloid sheet."""
    p = np.zeros(dim + 1)
    p[0] = 1.0
    return p


def validate_point(x: np.ndarray, tol: float = CONSTRAINT_TOL) -> np.ndarray:
    """Check the hyperboloid constraint and return x as a float array."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError(f"hyperboloid point must be a vector of length >= 2, got shape {x.shape}")
    q = x[0] * x[0] - np.dot(x[1:], x[1:])
    if abs(q - 1.0) > tol * max(1.0, x[0] * x[0]):
        raise ValueError(f"point violates hyperboloid constraint: x0^2 - |x_bar|^2 = {q!r}")
    if x[0] < 1.0 - tol:
        raise ValueError(f"point lies on the lower sheet: x0 = {x[0]!r}")
    return x


def minkowski_product(x: np.ndarray, y: np.ndarray) -> float:
    """Minkowski bilinear form x0*y0 - x1*y1 - ... - xd*yd.

    For two points on the upper sheet the value is >= 1, with equality iff x == y.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return float(x[0] * y[0] - np.dot(x[1:], y[1:]))


def hyperboloid_distance(x: np.ndarray, y: np.ndarray) -> float:
    """Geodesic distance arcosh(<x, y>_M). The argument is clamped to [1, inf)
    to absorb floating-point noise for near-coincident points."""
    return math.acosh(max(minkowski_product(x, y), 1.0))


def to_poincare(x: np.ndarray) -> PoincarePolar:
    """Stereographic projection of a point on the 2-d hyperboloid onto the unit disc.

    r = sqrt((x0 - 1) / (x0 + 1)), theta = atan2(x2, x1) mapped into [0, 2*pi).
    The apex projects to the disc origin with theta = 0 by convention.
    """
    x = validate_point(np.asarray(x, dtype=float))
    if x.size != 3:
        raise ValueError(f"stereographic projection requires d = 2, got d = {x.size - 1}")
    r = math.sqrt(max(x[0] - 1.0, 0.0) / (x[0] + 1.0))
    if x[1] == 0.0 and x[2] == 0.0:
        return PoincarePolar(0.0, 0.0)
    theta = math.atan2(x[2], x[1]) % TWO_PI
    return PoincarePolar(r, theta)


def from_poincare(p: PoincarePolar | tuple[float, float]) -> np.ndarray:
    """Inverse stereographic projection; exact inverse of :func:`to_poincare`."""
    r, theta = p
    if not 0.0 <= r < 1.0:
        raise ValueError(f"disc radius must lie in [0, 1), got {r!r}")
    denom = 1.0 - r * r
    x0 = (1.0 + r * r) / denom
    s = 2.0 * r / denom
    return np.array([x0, s * math.cos(theta), s * math.sin(theta)])


def poincare_distance(p: PoincarePolar | tuple[float, float],
                      q: PoincarePolar | tuple[float, float]) -> float:
    """Hyperbolic distance between two Poincare-disc points.

    Uses the chordal form
    arcosh(1 + 2*(r1^2 + r2^2 - 2 r1 r2 cos(t1 - t2)) / ((1 - r1^2)(1 - r2^2))),
    which agrees with the hyperboloid distance through the inverse projection.
    """
    r1, t1 = p
    r2, t2 = q
    chord_sq = r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * math.cos(t1 - t2)
    arg = 1.0 + 2.0 * max(chord_sq, 0.0) / ((1.0 - r1 * r1) * (1.0 - r2 * r2))
    return math.acosh(max(arg, 1.0))


def hyperbolic_mean(points: Sequence[np.ndarray] | np.ndarray,
                    weights: Sequence[float] | np.ndarray) -> HyperbolicCenter:
    """Weighted hyperbolic mean: normalize the weighted Euclidean mean by its
    Minkowski norm (the resultant length)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    w = np.asarray(weights, dtype=float)
    if pts.shape[0] == 0:
        raise ValueError("hyperbolic mean of an empty point set")
    if w.shape != (pts.shape[0],):
        raise ValueError(f"{pts.shape[0]} points but {w.shape} weights")
    if np.any(w < 0.0):
        raise ValueError("weights must be nonnegative")
    if abs(w.sum() - 1.0) > 1e-12:
        raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
    xbar = w @ pts
    q = xbar[0] * xbar[0] - np.dot(xbar[1:], xbar[1:])
    if q <= 0.0:
        raise ValueError("resultant length is not real; inputs are not hyperboloid points")
    rho = math.sqrt(q)
    return HyperbolicCenter(mean=xbar / rho, resultant_length=rho)


def lorentz_boost(c: np.ndarray) -> np.ndarray:
    """Hyperbolic translation matrix T_c mapping the apex to c.

    T_c = [[c0, cbar^T], [cbar, sqrt(I + cbar cbar^T)]]; the symmetric
    positive-definite square root has the closed form
    I + ((c0 - 1) / |cbar|^2) cbar cbar^T with c0 = sqrt(1 + |cbar|^2).
    T_c preserves the Minkowski form.
    """
    c = validate_point(np.asarray(c, dtype=float))
    d = c.size - 1
    cbar = c[1:]
    s = float(np.dot(cbar, cbar))
    T = np.eye(d + 1)
    if s < 1e-24:
        return T
    c0 = math.sqrt(1.0 + s)
    T[0, 0] = c0
    T[0, 1:] = cbar
    T[1:, 0] = cbar
    T[1:, 1:] += ((c0 - 1.0) / s) * np.outer(cbar, cbar)
    return T


def center_points(points: Sequence[np.ndarray] | np.ndarray,
                  center: np.ndarray) -> np.ndarray:
    """Translate a point cloud so that ``center`` moves to the apex.

    Applies T_{-c} with -c = (c0, -c1, ..., -cd); afterwards x0 is recomputed
    from the spatial part so the constraint holds exactly.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    c = validate_point(np.asarray(center, dtype=float))
    neg_c = c.copy()
    neg_c[1:] *= -1.0
    out = pts @ lorentz_boost(neg_c).T
    out[:, 0] = np.sqrt(1.0 + np.sum(out[:, 1:] ** 2, axis=1))
    return out
