"""Complementary subgroup splittings W * V of H^n.

V is a horizontal subgroup of dimension k spanned by an isotropic orthonormal
frame in the first layer; W is the vertical normal subgroup spanned by the
declared horizontal complement together with the center (the t-axis).  Every
point factors uniquely as p = p_W * p_V; the V-component is the linear
projection of the horizontal part onto span(v_frame) along span(w_frame),
and the W-component is p * p_V^{-1}.  Components can also be taken in the
reversed order p = p_V * p_W, which conjugates the W-part.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from . import group
from .group import Point
from .metrics import INFINITY, Metric, norm_coords
from .rng import substream

__all__ = [
    "Splitting",
    "Cone",
    "cone_contains",
    "project",
    "projection_identities_check",
    "norm_splitting_constant",
]

_ISOTROPY_TOL = 1e-12
_RANK_TOL = 1e-12
_CONE_SLACK = 1e-12  # boundary points count as inside


def _symplectic_gram(frame: np.ndarray, n: int) -> np.ndarray:
    x, y = frame[:, :n], frame[:, n:]
    return x @ y.T - y @ x.T


@dataclass(frozen=True)
class Splitting:
    """A complementary pair W * V with adapted orthonormal frames."""

    n: int
    k: int
    v_frame: np.ndarray  # (k, 2n) rows spanning the horizontal direction of V
    w_frame: np.ndarray  # (2n-k, 2n) rows spanning the horizontal part of W

    def __post_init__(self):
        n, k = self.n, self.k
        if not (1 <= k <= n):
            raise ValueError("need 1 <= k <= n")
        v = np.asarray(self.v_frame, dtype=float).reshape(k, 2 * n)
        w = np.asarray(self.w_frame, dtype=float).reshape(2 * n - k, 2 * n)
        if np.max(np.abs(v @ v.T - np.eye(k))) > 1e-9:
            raise ValueError("v_frame rows must be orthonormal")
        if np.max(np.abs(w @ w.T - np.eye(2 * n - k))) > 1e-9:
            raise ValueError("w_frame rows must be orthonormal")
        gram = _symplectic_gram(v, n)
        if np.max(np.abs(gram)) > _ISOTROPY_TOL:
            raise ValueError("v_frame must span an isotropic subspace")
        basis = np.vstack([v, w])
        if np.linalg.svd(basis, compute_uv=False)[-1] <= _RANK_TOL:
            raise ValueError("v_frame and w_frame must jointly span R^{2n}")
        object.__setattr__(self, "v_frame", v)
        object.__setattr__(self, "w_frame", w)

    @classmethod
    def standard(cls, n: int, k: int) -> "Splitting":
        """V spanned by the first k x-directions; W by the rest (and the t-axis)."""
        eye = np.eye(2 * n)
        v = eye[:k]
        w = np.vstack([eye[k:n], eye[n:]])
        return cls(n, k, v, w)

    @cached_property
    def _coeff(self) -> np.ndarray:
        # xy = basis.T @ c  =>  c = inv(basis.T) @ xy
        basis = np.vstack([self.v_frame, self.w_frame])
        return np.linalg.inv(basis.T)

    # -- coordinates <-> points ------------------------------------------------

    def embed_v(self, vcoords: np.ndarray) -> np.ndarray:
        """Coordinate array of the V-point with frame coefficients ``vcoords``."""
        vcoords = np.asarray(vcoords, dtype=float)
        xy = vcoords @ self.v_frame
        out = np.zeros(xy.shape[:-1] + (2 * self.n + 1,))
        out[..., : 2 * self.n] = xy
        return out

    def embed_w(self, wcoords: np.ndarray) -> np.ndarray:
        """W-point from frame coefficients plus trailing t-coordinate."""
        wcoords = np.asarray(wcoords, dtype=float)
        out = np.zeros(wcoords.shape[:-1] + (2 * self.n + 1,))
        out[..., : 2 * self.n] = wcoords[..., :-1] @ self.w_frame
        out[..., 2 * self.n] = wcoords[..., -1]
        return out

    def v_coefficients(self, coords: np.ndarray) -> np.ndarray:
        coords = np.asarray(coords, dtype=float)
        return coords[..., : 2 * self.n] @ self._coeff.T[:, : self.k]

    def w_coefficients(self, coords: np.ndarray) -> np.ndarray:
        """Frame coefficients (w_H) plus t of a point of W."""
        coords = np.asarray(coords, dtype=float)
        frame = coords[..., : 2 * self.n] @ self._coeff.T[:, self.k :]
        return np.concatenate([frame, coords[..., 2 * self.n :]], axis=-1)

    # -- projections -----------------------------------------------------------

    def project_coords(self, coords: np.ndarray, order: str = "wv"):
        """Components of p for p = w * v (order 'wv') or p = v * w ('vw')."""
        coords = np.asarray(coords, dtype=float)
        v = self.embed_v(self.v_coefficients(coords))
        w = group.mul(coords, group.inv(v), self.n)
        if order == "wv":
            return w, v
        if order == "vw":
            # p = v * (v^{-1} w v)
            w2 = group.mul(group.mul(group.inv(v), w, self.n), v, self.n)
            return v, w2
        raise ValueError("order must be 'wv' or 'vw'")


def project(s: Splitting, p: Point) -> tuple[Point, Point]:
    """Unique factors (w, v) with p = w * v."""
    if p.n != s.n:
        raise ValueError("group index mismatch")
    w, v = s.project_coords(p.coords)
    return Point.from_coords(s.n, w), Point.from_coords(s.n, v)


# ---------------------------------------------------------------------------
# intrinsic cones
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Cone:
    """Left-translated cone {q : |q_base| <= beta |q_axis|} with vertex p."""

    splitting: Splitting
    vertex: Point
    beta: float
    base: str = "W"  # which factor is the base; the other is the axis

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("cone opening must be nonnegative")
        if self.base not in ("W", "V"):
            raise ValueError("base must be 'W' or 'V'")


def cone_contains(cone: Cone, q: Point, metric: Metric = INFINITY) -> bool:
    """Membership test with an additive slack so boundary points count."""
    s = cone.splitting
    z = group.mul(group.inv(cone.vertex.coords), q.coords, s.n)
    if cone.base == "W":
        b, a = s.project_coords(z, order="wv")
    else:
        b, a = s.project_coords(z, order="vw")
    nb = float(norm_coords(metric, b, s.n))
    na = float(norm_coords(metric, a, s.n))
    return nb <= cone.beta * na + _CONE_SLACK


# ---------------------------------------------------------------------------
# sampled identity checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IdentityReport:
    """Max coordinate residuals of the projection identities over a sample."""

    product_w: float      # P_W(pq) = P_W(p) P_V(p) P_W(q) P_V(p)^{-1}
    product_v: float      # P_V(pq) = P_V(p) P_V(q)
    inverse_w: float      # P_W(p^{-1}) = P_V(p)^{-1} P_W(p)^{-1} P_V(p)
    inverse_v: float      # P_V(p^{-1}) = P_V(p)^{-1}
    homomorphism_v: float  # P_V along random products, same identity as product_v

    @property
    def max_residual(self) -> float:
        return max(self.product_w, self.product_v, self.inverse_w, self.inverse_v,
                   self.homomorphism_v)


def projection_identities_check(
    s: Splitting, samples: int, seed: int, box: float = 2.0
) -> IdentityReport:
    n = s.n
    worst = np.zeros(5)
    chunk = 1 << 14
    for start in range(0, samples, chunk):
        stop = min(start + chunk, samples)
        g = substream(seed, 0x1DE, start // chunk)
        p = g.uniform(-box, box, size=(stop - start, 2 * n + 1))
        q = g.uniform(-box, box, size=(stop - start, 2 * n + 1))
        pw, pv = s.project_coords(p)
        qw, qv = s.project_coords(q)
        pq = group.mul(p, q, n)
        pqw, pqv = s.project_coords(pq)
        rhs_w = group.mul(group.mul(pw, pv, n), group.mul(qw, group.inv(pv), n), n)
        worst[0] = max(worst[0], np.max(np.abs(pqw - rhs_w)))
        worst[1] = max(worst[1], np.max(np.abs(pqv - group.mul(pv, qv, n))))
        iw, iv = s.project_coords(group.inv(p))
        rhs_iw = group.mul(group.inv(pv), group.mul(group.inv(pw), pv, n), n)
        worst[2] = max(worst[2], np.max(np.abs(iw - rhs_iw)))
        worst[3] = max(worst[3], np.max(np.abs(iv - group.inv(pv))))
        qpv = s.project_coords(group.mul(q, p, n))[1]
        worst[4] = max(worst[4], np.max(np.abs(qpv - group.mul(qv, pv, n))))
    return IdentityReport(*worst)


@dataclass(frozen=True)
class SplitNormReport:
    """Empirical constants in C (|p_W| + |p_V|) <= |p| <= |p_W| + |p_V|."""

    c_tilde: float               # largest empirical C for the left inequality
    right_violation: float       # max of |p| - (|p_W| + |p_V|), must be <= tol
    samples: int


def norm_splitting_constant(
    s: Splitting, metric: Metric, samples: int, seed: int, box: float = 2.0
) -> SplitNormReport:
    n = s.n
    c_tilde = np.inf
    right = -np.inf
    chunk = 1 << 14
    for start in range(0, samples, chunk):
        stop = min(start + chunk, samples)
        g = substream(seed, 0x591, start // chunk)
        p = g.uniform(-box, box, size=(stop - start, 2 * n + 1))
        w, v = s.project_coords(p)
        np_ = norm_coords(metric, p, n)
        nw = norm_coords(metric, w, n)
        nv = norm_coords(metric, v, n)
        total = nw + nv
        keep = total > 1e-12
        c_tilde = min(c_tilde, float(np.min(np_[keep] / total[keep])))
        right = max(right, float(np.max(np_ - total)))
    return SplitNormReport(c_tilde=c_tilde, right_violation=right, samples=samples)
