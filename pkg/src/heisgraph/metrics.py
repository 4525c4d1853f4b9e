"""Homogeneous norms and left-invariant distances on H^n.

Two closed-form gauges (the infinity gauge ``max(|(x,y)|, 2 sqrt|t|)`` and
the Koranyi gauge ``(|(x,y)|^4 + 16 t^2)^(1/4)``) plus a certified upper
bound for the Carnot-Caratheodory distance obtained by optimising the
L^1-in-time cost of a piecewise-constant horizontal control whose flow ends
at the target point.  All distances are left-invariant and homogeneous by
construction: ``distance(p, q) = norm(p^{-1} q)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import group
from .group import HorizontalControl, Point
from .rng import substream

__all__ = [
    "CcParams",
    "CcBound",
    "Metric",
    "INFINITY",
    "KORANYI",
    "norm",
    "norm_coords",
    "distance",
    "distance_coords",
    "cc_upper",
    "equivalence_constants",
]


@dataclass(frozen=True)
class CcParams:
    """Control-optimisation parameters for the Carnot-Caratheodory bound."""

    segments: int = 16
    restarts: int = 4
    sweeps: int = 30          # coordinate-descent sweeps per penalty round
    endpoint_tol: float = 1e-9

    def __post_init__(self):
        if self.segments < 1 or self.restarts < 1 or self.sweeps < 1:
            raise ValueError("segments, restarts and sweeps must be positive")


@dataclass(frozen=True)
class Metric:
    """A left-invariant homogeneous distance, selected by tag.

    ``cc`` carries optimisation parameters; the closed-form kinds must not.
    """

    kind: str
    cc: Optional[CcParams] = None

    def __post_init__(self):
        if self.kind not in ("infinity", "koranyi", "cc"):
            raise ValueError(f"unknown metric kind {self.kind!r}")
        if (self.kind == "cc") != (self.cc is not None):
            raise ValueError("cc parameters are required exactly when kind='cc'")

    @classmethod
    def carnot(cls, params: CcParams = CcParams()) -> "Metric":
        return cls("cc", params)


INFINITY = Metric("infinity")
KORANYI = Metric("koranyi")


def norm_coords(metric: Metric, coords: np.ndarray, n: int) -> np.ndarray:
    """Homogeneous norm of coordinate arrays (..., 2n+1)."""
    coords = np.asarray(coords, dtype=float)
    if metric.kind == "infinity":
        horiz = np.linalg.norm(coords[..., : 2 * n], axis=-1)
        return np.maximum(horiz, 2.0 * np.sqrt(np.abs(coords[..., 2 * n])))
    if metric.kind == "koranyi":
        r2 = np.sum(coords[..., : 2 * n] ** 2, axis=-1)
        return (r2 * r2 + 16.0 * coords[..., 2 * n] ** 2) ** 0.25
    flat = coords.reshape(-1, 2 * n + 1)
    vals = np.array([cc_upper(c, n, metric.cc).value for c in flat])
    return vals.reshape(coords.shape[:-1])


def norm(metric: Metric, p: Point) -> float:
    return float(norm_coords(metric, p.coords, p.n))


def distance_coords(metric: Metric, a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    return norm_coords(metric, group.mul(group.inv(a), b, n), n)


def distance(metric: Metric, p: Point, q: Point) -> float:
    if p.n != q.n:
        raise ValueError("group index mismatch")
    return float(distance_coords(metric, p.coords, q.coords, p.n))


# ---------------------------------------------------------------------------
# Carnot-Caratheodory upper bound
# ---------------------------------------------------------------------------
#
# A control with K equal-duration segments has endpoint
#   xy_end = s * sum_i H_i,          t_end = (s^2/2) * sum_{a<b} omega(H_a, H_b)
# with s = 1/K, so both are polynomial in the segment vectors and affine in
# any single scalar entry.  The cost is (1/K) * sum_i |H_i|.  We minimise
# cost plus a quadratic endpoint penalty (ramped over 3 rounds) by cyclic
# coordinate descent with exact 1-d solves, then project the best control
# onto the endpoint constraint with Gauss-Newton least squares.  The target
# is normalised to unit infinity gauge first, which makes the returned bound
# exactly homogeneous under dilations.


@dataclass(frozen=True)
class CcBound:
    """Upper bound for the CC distance with its certifying control."""

    value: float
    endpoint_error: float
    certified: bool
    control: HorizontalControl


def _endpoint(H: np.ndarray, n: int) -> np.ndarray:
    """Endpoint coordinates of the K-segment flow from the origin."""
    K = H.shape[0]
    s = 1.0 / K
    xy = s * H.sum(axis=0)
    prefix = np.cumsum(H, axis=0) - H  # prefix[i] = sum_{a<i} H_a
    t = 0.5 * s * s * float(np.sum(group.omega(prefix, H, n)))
    return np.concatenate([xy, [t]])


def _t_gradient(H: np.ndarray, n: int) -> np.ndarray:
    """d t_end / d H, shape (K, 2n)."""
    K = H.shape[0]
    s = 1.0 / K
    total = H.sum(axis=0)
    prefix = np.cumsum(H, axis=0) - H
    suffix = total - prefix - H
    grad = np.empty_like(H)
    # omega(P_i, H_i) + omega(H_i, Q_i) differentiated in H_i
    grad[:, :n] = 0.5 * s * s * (suffix[:, n:] - prefix[:, n:])
    grad[:, n:] = 0.5 * s * s * (prefix[:, :n] - suffix[:, :n])
    return grad


def _solve_1d(c: float, invK: float, mu: float, A: float, D: float, xi0: float) -> float:
    """Minimise (1/K) sqrt(c + xi^2) + mu * quad(xi); derivative is monotone."""
    # root of  invK * xi / sqrt(c + xi^2) + 2 mu (A (xi - xi0) + D) = 0
    half = (abs(D) + invK / (2.0 * mu)) / A + 1.0
    lo, hi = xi0 - half, xi0 + half

    def deriv(xi: float) -> float:
        den = math.sqrt(c + xi * xi)
        cost_term = invK * xi / den if den > 0.0 else 0.0
        return cost_term + 2.0 * mu * (A * (xi - xi0) + D)

    flo = deriv(lo)
    if flo >= 0.0:
        return lo
    if deriv(hi) <= 0.0:
        return hi
    for _ in range(70):
        mid = 0.5 * (lo + hi)
        if deriv(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _coordinate_descent(H: np.ndarray, target: np.ndarray, n: int, params: CcParams) -> np.ndarray:
    K = H.shape[0]
    s = 1.0 / K
    invK = s
    for mu in (1e2, 1e4, 1e6):
        for _ in range(params.sweeps):
            err = _endpoint(H, n) - target
            tgrad = _t_gradient(H, n)
            moved = 0.0
            for i in range(K):
                for d in range(2 * n):
                    xi0 = H[i, d]
                    a_t = tgrad[i, d]
                    A = s * s + a_t * a_t
                    D = s * err[d] + a_t * err[2 * n]
                    c = float(np.dot(H[i], H[i])) - xi0 * xi0
                    xi = _solve_1d(max(c, 0.0), invK, mu, A, D, xi0)
                    delta = xi - xi0
                    if delta != 0.0:
                        H[i, d] = xi
                        err[d] += s * delta
                        err[2 * n] += a_t * delta
                        moved = max(moved, abs(delta))
                        # refresh the (affine) t-gradient rows affected by H_i
                        if d < n:
                            tgrad[:i, n + d] += 0.5 * s * s * delta
                            tgrad[i + 1 :, n + d] -= 0.5 * s * s * delta
                        else:
                            tgrad[:i, d - n] -= 0.5 * s * s * delta
                            tgrad[i + 1 :, d - n] += 0.5 * s * s * delta
            if moved < 1e-13:
                break
    return H


def _project_endpoint(H: np.ndarray, target: np.ndarray, n: int, tol: float) -> np.ndarray:
    """Gauss-Newton least-norm correction onto the endpoint constraint."""
    K = H.shape[0]
    s = 1.0 / K
    for _ in range(15):
        err = _endpoint(H, n) - target
        if np.max(np.abs(err)) <= tol:
            break
        J = np.zeros((2 * n + 1, K * 2 * n))
        for d in range(2 * n):
            J[d, d :: 2 * n] = s
        J[2 * n] = _t_gradient(H, n).reshape(-1)
        step, *_ = np.linalg.lstsq(J, -err, rcond=None)
        H = H + step.reshape(K, 2 * n)
    return H


def _cc_starts(target: np.ndarray, n: int, params: CcParams, seed: int):
    K = params.segments
    straight = np.tile(target[: 2 * n], (K, 1))
    yield straight.copy()
    count = 1
    if abs(target[2 * n]) > 1e-14 and params.restarts > 1:
        # closed polygon in the (x_1, y_1) plane enclosing the needed area
        signs = 1.0 if target[2 * n] > 0 else -1.0
        phi = 2.0 * np.pi * (np.arange(K) + 0.5) / K
        loop = np.zeros((K, 2 * n))
        loop[:, 0] = -np.sin(phi) * signs
        loop[:, n] = np.cos(phi)
        area = _endpoint(loop, n)[2 * n]
        if abs(area) > 1e-12:
            scale = math.sqrt(abs(target[2 * n]) / abs(area))
            yield scale * loop + straight
            count += 1
    idx = 0
    while count < params.restarts:
        g = substream(seed, 0xCC, idx)
        yield straight + g.normal(size=(K, 2 * n))
        idx += 1
        count += 1


def cc_upper(p, n: Optional[int] = None, params: CcParams = CcParams(), seed: int = 0) -> CcBound:
    """Certified upper bound for the CC distance from the origin to ``p``.

    Returns the minimum cost over ``params.restarts`` local optimisations.
    The endpoint constraint is enforced by a ramped quadratic penalty plus a
    final Gauss-Newton projection; if the projected control misses ``p`` by
    more than ``endpoint_tol`` the bound is returned uncertified, carrying
    the best penalty-feasible value.
    """
    if isinstance(p, Point):
        coords, n = p.coords, p.n
    else:
        if n is None:
            raise ValueError("n is required when p is a coordinate array")
        coords = np.asarray(p, dtype=float)
    sigma = float(norm_coords(INFINITY, coords, n))
    K = params.segments
    if sigma == 0.0:
        empty = HorizontalControl(n, tuple((np.zeros(2 * n), 1.0 / K) for _ in range(K)))
        return CcBound(0.0, 0.0, True, empty)
    unit = group.dil(1.0 / sigma, coords, n)
    # endpoint misses are measured coordinate-wise; under the normalising
    # dilation, coordinates scale by at most max(sigma, sigma^2)
    scale_back = max(sigma, sigma * sigma)
    tol_unit = params.endpoint_tol / scale_back

    best_cost = math.inf
    best_H = None
    best_err = math.inf
    for start in _cc_starts(unit, n, params, seed):
        H = _coordinate_descent(start, unit, n, params)
        H = _project_endpoint(H, unit, n, tol_unit * 1e-2)
        err = float(np.max(np.abs(_endpoint(H, n) - unit)))
        cost = float(np.linalg.norm(H, axis=1).sum() / K)
        feasible = err <= tol_unit
        best_feasible = best_err <= tol_unit
        better = (feasible and (not best_feasible or cost < best_cost)) or (
            not feasible and not best_feasible and err < best_err
        )
        if better:
            best_cost, best_H, best_err = cost, H, err

    control = HorizontalControl(
        n, tuple((sigma * best_H[i], 1.0 / K) for i in range(K))
    )
    return CcBound(
        value=sigma * best_cost,
        endpoint_error=scale_back * best_err,
        certified=bool(best_err <= tol_unit),
        control=control,
    )


# ---------------------------------------------------------------------------
# cross-metric equivalence constants
# ---------------------------------------------------------------------------

def equivalence_constants(
    kind1: Metric, kind2: Metric, n: int, samples: int, seed: int
) -> tuple[float, float]:
    """Empirical bi-Lipschitz constants between two homogeneous norms.

    Samples points on the unit sphere of ``kind1`` (normalising Gaussian
    draws by a dilation) and returns min/max of ``norm2 / norm1``.
    """
    if samples < 1:
        raise ValueError("sample count must be >= 1")
    lo, hi = math.inf, -math.inf
    chunk = 1 << 14
    for start in range(0, samples, chunk):
        stop = min(start + chunk, samples)
        g = substream(seed, 0xE01, start // chunk)
        pts = g.normal(size=(stop - start, 2 * n + 1))
        n1 = norm_coords(kind1, pts, n)
        keep = n1 > 1e-12
        pts = pts[keep]
        lam = 1.0 / n1[keep]
        unit = np.empty_like(pts)
        unit[:, : 2 * n] = pts[:, : 2 * n] * lam[:, None]
        unit[:, 2 * n] = pts[:, 2 * n] * lam * lam
        ratios = norm_coords(kind2, unit, n) / norm_coords(kind1, unit, n)
        lo = min(lo, float(ratios.min()))
        hi = max(hi, float(ratios.max()))
    return lo, hi
