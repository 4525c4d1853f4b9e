"""Intrinsic linear maps and intrinsic-differential estimation.

A map W -> V is intrinsic linear when its graph is a homogeneous subgroup;
equivalently it acts as a k x (2n-k) matrix on the horizontal coordinates
w_H of W (frame coefficients, t dropped).  The differential of a sampled
function at a base point is estimated by translating the base point to the
origin and fitting that matrix by weighted least squares over shrinking
metric balls, with the weight 1/|w|^2 equalising the shells' contribution to
the defining ratio d(phi(w), M w_H) / |w|.  The graph of the fitted matrix
is the candidate tangent subgroup, and the cone characterisation of
differentiability is checked directly: for each requested opening, the
largest ball radius whose graph piece avoids the cone around the tangent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import group
from .graph import SampledFunction, VOrientedFunction, translate_function
from .group import Point
from .metrics import INFINITY, Metric, norm_coords
from .rng import substream
from .splitting import Splitting

__all__ = [
    "IntrinsicLinearMap",
    "DiffEstimate",
    "TangentSubgroup",
    "linear_apply",
    "estimate_differential",
    "tangent_subgroup",
    "verify_cone_characterization",
    "pansu_quotient",
    "pansu_schedule",
]

_CONE_SLACK = 1e-12


# ---------------------------------------------------------------------------
# intrinsic linear maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntrinsicLinearMap:
    """phi(w) = matrix @ w_H, whose graph is a homogeneous subgroup."""

    splitting: Splitting
    matrix: np.ndarray  # (k, 2n - k)

    def __post_init__(self):
        s = self.splitting
        m = np.asarray(self.matrix, dtype=float).reshape(s.k, 2 * s.n - s.k)
        if not np.all(np.isfinite(m)):
            raise ValueError("matrix entries must be finite")
        object.__setattr__(self, "matrix", m)

    def __call__(self, wcoords: np.ndarray) -> np.ndarray:
        """Apply to W-coordinates (frame coefficients + trailing t)."""
        wcoords = np.asarray(wcoords, dtype=float)
        return wcoords[..., :-1] @ self.matrix.T

    def graph_point_coords(self, wcoords: np.ndarray) -> np.ndarray:
        s = self.splitting
        return group.mul(s.embed_w(wcoords), s.embed_v(self(wcoords)), s.n)

    def validate(self, samples: int = 64, seed: int = 0, tol: float = 1e-10) -> float:
        """Max closure residual of the graph under products and dilations."""
        s = self.splitting
        g = substream(seed, 0x11)
        d = 2 * s.n - s.k + 1
        a = g.uniform(-1.0, 1.0, size=(samples, d))
        b = g.uniform(-1.0, 1.0, size=(samples, d))
        pa, pb = self.graph_point_coords(a), self.graph_point_coords(b)
        prod = group.mul(pa, pb, s.n)
        w, v = s.project_coords(prod)
        viol = np.max(np.abs(s.v_coefficients(v) - self(s.w_coefficients(w))))
        lam = 1.7
        dila = group.dil(lam, pa, s.n)
        w2, v2 = s.project_coords(dila)
        viol = max(viol, np.max(np.abs(s.v_coefficients(v2) - self(s.w_coefficients(w2)))))
        if viol > tol:
            raise ValueError(f"graph closure residual {viol:.2e} exceeds {tol:.0e}")
        return float(viol)


def linear_apply(lin: IntrinsicLinearMap, wcoords: np.ndarray) -> np.ndarray:
    return lin(wcoords)


# ---------------------------------------------------------------------------
# differential estimation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiffEstimate:
    """Fitted differential with its residual schedule.

    ``residuals[i]`` is the sup over the ball of radius ``radii[i]`` of
    d(phi_wbar(w), M_i w_H) / |w| for the matrix fitted at that radius;
    ``matrix`` is the fit at the smallest radius.  The verdict thresholds
    (decay factor and final tolerance) are engineering defaults surfaced by
    callers, not properties of the underlying limit.
    """

    base: np.ndarray
    radii: np.ndarray
    residuals: np.ndarray
    matrix: np.ndarray
    matrices: tuple
    verdict: str                      # consistent | inconclusive | fails
    diagnostics: dict

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        if not np.all(np.diff(r) < 0):
            raise ValueError("radii must be strictly decreasing")
        if np.any(np.asarray(self.residuals) < 0):
            raise ValueError("residuals must be nonnegative")


def estimate_differential(f: SampledFunction, wbar: np.ndarray, radii,
                          metric: Metric = INFINITY, tol: float = 0.05,
                          decay_factor: float = 1.5,
                          exact_threshold: float = 1e-9) -> DiffEstimate:
    """Weighted least-squares differential estimate at ``wbar``.

    The base point needs two grid cells of margin beyond the largest radius;
    rank-deficient normal equations yield an 'inconclusive' verdict with a
    diagnostic rather than a fit.
    """
    s = f.splitting
    n = s.n
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or len(radii) < 1 or np.any(radii <= 0):
        raise ValueError("radii must be positive")
    if not np.all(np.diff(radii) < 0):
        raise ValueError("radii must be strictly decreasing")

    tf = translate_function(f, wbar)
    nodes = tf.grid.node_coords
    pts = tf.splitting.embed_w(nodes)
    wnorm = norm_coords(metric, pts, n)
    active = tf.active & (wnorm > 0)

    # margin: the largest ball plus two cells must stay inside the mask
    h = tf.grid.spacings
    margin = wnorm <= radii[0] + 2.0 * float(np.max(h))
    if np.any(margin & ~tf.active):
        raise ValueError("base point lacks a 2-cell margin inside the active domain "
                         "at the largest radius")

    k = s.k
    ncols = 2 * s.n - s.k
    matrices = []
    residuals = np.empty(len(radii))
    diagnostics: dict = {"translation": tf.info, "rank_deficient": []}
    vals = tf.value_rows
    for i, r in enumerate(radii):
        sel = active & (wnorm <= r)
        m = int(np.count_nonzero(sel))
        X = nodes[sel][:, :-1]
        Y = vals[sel]
        wgt = 1.0 / wnorm[sel]
        Xw = X * wgt[:, None]
        Yw = Y * wgt[:, None]
        if m < ncols or np.linalg.matrix_rank(Xw, tol=1e-12) < ncols:
            diagnostics["rank_deficient"].append(float(r))
            matrices.append(np.zeros((k, ncols)))
            residuals[i] = math.nan
            continue
        sol, *_ = np.linalg.lstsq(Xw, Yw, rcond=None)
        M = sol.T
        matrices.append(M)
        err = np.linalg.norm(Y - X @ M.T, axis=1) / wnorm[sel]
        residuals[i] = float(err.max()) if m else 0.0

    if diagnostics["rank_deficient"]:
        verdict = "inconclusive"
    else:
        res = residuals
        if res[-1] < exact_threshold:
            verdict = "consistent"
        elif np.all(res[1:] <= res[:-1] / decay_factor + 1e-15) and res[-1] < tol:
            verdict = "consistent"
        elif np.all(res[1:] >= res[:-1] * (1 - 1e-12)) and np.min(res) > tol:
            verdict = "fails"
        else:
            verdict = "inconclusive"

    return DiffEstimate(base=np.asarray(wbar, dtype=float), radii=radii,
                        residuals=residuals, matrix=matrices[-1],
                        matrices=tuple(matrices), verdict=verdict,
                        diagnostics=diagnostics)


# ---------------------------------------------------------------------------
# tangent subgroup and the cone characterisation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TangentSubgroup:
    """The vertical subgroup graph(M), complementary to V.

    Decomposition against V is closed form: for p = tau * u with tau in the
    subgroup and u in V, the V-factor has coefficients v_coeff(p_V) - M w_H(p_W).
    """

    splitting: Splitting
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", m)

    def decompose_coords(self, coords: np.ndarray):
        """(tau, u_vcoords) with p = tau * embed_v(u)."""
        s = self.splitting
        w, v = s.project_coords(np.asarray(coords, dtype=float))
        u = s.v_coefficients(v) - s.w_coefficients(w)[..., :-1] @ self.matrix.T
        tau = group.mul(coords, group.inv(s.embed_v(u)), s.n)
        return tau, u

    def contains_coords(self, coords: np.ndarray, tol: float = 1e-10) -> np.ndarray:
        _, u = self.decompose_coords(coords)
        return np.linalg.norm(np.atleast_2d(u), axis=-1) <= tol

    def validate(self, samples: int = 64, seed: int = 0, tol: float = 1e-10):
        """Check dilation closure and complementarity on random points."""
        s = self.splitting
        lin = IntrinsicLinearMap(s, self.matrix)
        lin.validate(samples=samples, seed=seed, tol=tol)
        g = substream(seed, 0x7A)
        pts = g.uniform(-1.0, 1.0, size=(samples, 2 * s.n + 1))
        tau, u = self.decompose_coords(pts)
        recon = group.mul(tau, s.embed_v(u), s.n)
        resid = float(np.max(np.abs(recon - pts)))
        if resid > tol:
            raise ValueError(f"tangent-V decomposition residual {resid:.2e}")
        if not np.all(self.contains_coords(tau, tol)):
            raise ValueError("decomposition left the subgroup")
        return resid


def tangent_subgroup(estimate: DiffEstimate, splitting: Splitting) -> TangentSubgroup:
    """Graph of the fitted differential, validated homogeneous + complementary."""
    if estimate.verdict == "fails":
        raise ValueError("cannot build a tangent from a failed estimate")
    t = TangentSubgroup(splitting, estimate.matrix)
    t.validate()
    return t


@dataclass(frozen=True)
class ConeRadiusEntry:
    alpha: float
    radius: Optional[float]     # None when even the smallest radius fails
    full_grid: bool


def verify_cone_characterization(f: SampledFunction, wbar: np.ndarray,
                                 tangent: TangentSubgroup, alphas,
                                 metric: Metric = INFINITY,
                                 floor_cells: float = 2.0) -> list:
    """Largest cone-avoidance radius around the tangent, per opening.

    For each opening the reported radius is the smallest ball distance of a
    graph point falling inside the closed cone with base ``tangent`` and
    axis V (the open ball of that radius still avoids the cone); nodes
    closer than ``floor_cells`` grid cells mean no usable radius at all.
    """
    s = f.splitting
    n = s.n
    wbar = np.asarray(wbar, dtype=float)
    val0, ok = f.evaluate(wbar)
    if not ok:
        raise ValueError("base point outside the active domain")
    pbar = group.mul(s.embed_w(wbar), s.embed_v(val0), n)
    idx = np.nonzero(f.active)[0]
    wnodes = f.node_points[idx]
    dball = norm_coords(metric, group.mul(group.inv(s.embed_w(wbar)), wnodes, n), n)
    keep = dball > 0
    idx, dball = idx[keep], dball[keep]
    z = group.mul(group.inv(pbar), f.graph_points[idx], n)
    tau, u = tangent.decompose_coords(z)
    nt = norm_coords(metric, tau, n)
    nv = np.linalg.norm(np.atleast_2d(u), axis=-1)
    h = f.grid.spacings
    floor = floor_cells * max(float(np.max(h[:-1])), 2.0 * math.sqrt(float(h[-1])))
    r_full = float(dball.max())
    out = []
    for alpha in alphas:
        inside = nt <= alpha * nv + _CONE_SLACK
        if not inside.any():
            out.append(ConeRadiusEntry(float(alpha), r_full, True))
            continue
        r = float(dball[inside].min())
        if r <= floor:
            out.append(ConeRadiusEntry(float(alpha), None, False))
        else:
            out.append(ConeRadiusEntry(float(alpha), r, False))
    return out


# ---------------------------------------------------------------------------
# Pansu difference quotients of graph maps (functions V -> W)
# ---------------------------------------------------------------------------

def pansu_quotient(g: VOrientedFunction, vbar: np.ndarray, v: np.ndarray,
                   lam: float) -> Optional[Point]:
    """Dilation-renormalised increment of the graph map at ``vbar``.

    Returns None when the dilated argument leaves the active domain.
    """
    if not (lam > 0):
        raise ValueError("lambda must be positive")
    s = g.splitting
    vbar = np.asarray(vbar, dtype=float)
    arg = vbar + lam * np.asarray(v, dtype=float)
    w0, ok0 = g.evaluate(vbar)
    w1, ok1 = g.evaluate(arg)
    if not (ok0 and ok1):
        return None
    phi0 = group.mul(s.embed_v(vbar), s.embed_w(w0), s.n)
    phi1 = group.mul(s.embed_v(arg), s.embed_w(w1), s.n)
    q = group.dil(1.0 / lam, group.mul(group.inv(phi0), phi1, s.n), s.n)
    return Point.from_coords(s.n, q)


@dataclass(frozen=True)
class PansuReport:
    lambdas: np.ndarray
    quotients: np.ndarray          # (len(lambdas), 2n+1); NaN rows were masked
    cauchy_gap: float              # max successive distance among valid rows
    converged: bool


def pansu_schedule(g: VOrientedFunction, vbar: np.ndarray, v: np.ndarray,
                   lambdas, metric: Metric = INFINITY,
                   tol: float = 1e-6) -> PansuReport:
    """Difference-quotient convergence diagnostic along a lambda schedule."""
    lambdas = np.asarray(lambdas, dtype=float)
    n = g.splitting.n
    rows = np.full((len(lambdas), 2 * n + 1), np.nan)
    for i, lam in enumerate(lambdas):
        q = pansu_quotient(g, vbar, v, lam)
        if q is not None:
            rows[i] = q.coords
    valid = ~np.isnan(rows[:, 0])
    gap = 0.0
    vi = np.nonzero(valid)[0]
    for a, b in zip(vi[:-1], vi[1:]):
        gap = max(gap, float(norm_coords(
            metric, group.mul(group.inv(rows[a]), rows[b], n), n)))
    return PansuReport(lambdas=lambdas, quotients=rows, cauchy_gap=gap,
                       converged=bool(gap <= tol and vi.size >= 2))
