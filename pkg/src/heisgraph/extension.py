"""Codimension-1 machinery: cone boundaries, envelope extension, sandwiching.

With dim(V) = 1 the fiber direction is ordered like the reals, so cones have
scalar upper and lower boundary functions over W.  The W-component of
p^{-1} (w v) does not depend on v, which makes both boundaries of the cone
with vertex p = u * c explicit:

    upper(w) = c + (1/beta) |c^{-1} u^{-1} w c|
    lower(w) = c - (1/beta) |c^{-1} u^{-1} w c|

The extension of a function prescribed on a node set E takes the pointwise
min of upper boundaries (resp. max of lower boundaries) of the cones of
opening 1/L anchored at the prescribed graph points; for cone geometry this
envelope coincides with the infimum over all L-Lipschitz majorants and costs
O(|E|) per query.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import group
from .diff import DiffEstimate, estimate_differential
from .graph import SampledFunction, _increment_parts, _norm_xy_t, lipschitz_constant
from .group import Point
from .metrics import INFINITY, Metric
from .splitting import Splitting

__all__ = [
    "ConeBoundary",
    "ExtensionResult",
    "LipschitzBudgetError",
    "cone_boundary",
    "mcshane_extend",
    "SandwichRecord",
    "sandwich_harness",
]

_EQ_TOL = 1e-12


class LipschitzBudgetError(ValueError):
    """Prescribed data exceeds the declared Lipschitz budget."""

    def __init__(self, measured: float, declared: float, pair):
        super().__init__(
            f"restriction has intrinsic Lipschitz constant {measured:.6g} > "
            f"declared {declared:.6g} (witness node pair {pair})")
        self.measured = measured
        self.declared = declared
        self.pair = pair


@dataclass(frozen=True)
class ConeBoundary:
    """Scalar boundary function of the cone of opening beta at a vertex."""

    splitting: Splitting
    vertex: Point
    beta: float

    def __post_init__(self):
        if self.splitting.k != 1:
            raise ValueError("cone boundaries need a 1-dimensional axis V")
        if not self.beta > 0:
            raise ValueError("cone opening must be positive")

    def _w_distance(self, wcoords: np.ndarray, metric: Metric) -> np.ndarray:
        # |c^{-1} u^{-1} w c| via the sheared-increment closed form, which
        # cancels exactly at the apex
        s = self.splitting
        w_part, v_part = s.project_coords(self.vertex.coords)
        cval = s.v_coefficients(v_part)
        wq = s.embed_w(np.asarray(wcoords, dtype=float))
        dxy, tau, _ = _increment_parts(s, w_part, cval, wq, cval)
        return _norm_xy_t(metric, dxy, tau, s.n)

    def value(self, wcoords: np.ndarray, metric: Metric = INFINITY) -> np.ndarray:
        """Upper boundary value(s) at W-coordinates."""
        s = self.splitting
        c = float(s.v_coefficients(self.vertex.coords)[..., 0])
        return c + self._w_distance(wcoords, metric) / self.beta

    def lower_value(self, wcoords: np.ndarray, metric: Metric = INFINITY) -> np.ndarray:
        s = self.splitting
        c = float(s.v_coefficients(self.vertex.coords)[..., 0])
        return c - self._w_distance(wcoords, metric) / self.beta


def cone_boundary(gf: ConeBoundary, wcoords: np.ndarray,
                  metric: Metric = INFINITY) -> float:
    return float(gf.value(wcoords, metric))


# ---------------------------------------------------------------------------
# envelope extension
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExtensionResult:
    """Upper/lower envelopes with the certified equality set.

    Invariants enforced at construction: lower <= upper on the grid, and
    both agree with the prescribed data on E to 1e-12.
    """

    upper: SampledFunction
    lower: SampledFunction
    prescribed: np.ndarray        # boolean grid mask of E
    equality: np.ndarray          # nodes where upper = phi = lower to 1e-12
    lip_upper: float
    lip_lower: float
    declared_lip: float


def mcshane_extend(f: SampledFunction, prescribed: np.ndarray, lip: float,
                   metric: Metric = INFINITY) -> ExtensionResult:
    """Extend phi from the node set E by cone-boundary envelopes.

    Requires phi restricted to E to be intrinsic ``lip``-Lipschitz; the
    upper extension is the min over E of upper cone boundaries of opening
    1/lip anchored at the prescribed graph points, the lower one the max of
    the mirrored boundaries.
    """
    s = f.splitting
    n = s.n
    if s.k != 1:
        raise ValueError("extension needs a 1-dimensional V")
    if not lip > 0:
        raise ValueError("Lipschitz budget must be positive")
    emask = np.asarray(prescribed, dtype=bool).reshape(-1)
    emask = emask & f.active
    eidx = np.nonzero(emask)[0]
    if eidx.size == 0:
        raise ValueError("prescribed set is empty")
    if eidx.size >= 2:
        measured = lipschitz_constant(f, metric, subset=emask.reshape(f.grid.shape))
        if measured.infinite or measured.value > lip * (1 + 1e-12) + 1e-15:
            raise LipschitzBudgetError(measured.value, lip, measured.witness)

    # gamma_u(w) = phi(u) +/- lip * |c_u^{-1} u^{-1} w c_u|
    wnodes = f.node_points
    upper = np.full(f.grid.size, np.inf)
    lower = np.full(f.grid.size, -np.inf)
    for u in eidx:
        dxy, tau, _ = _increment_parts(s, wnodes[u], f.value_rows[u],
                                       wnodes, f.value_rows[u])
        dist = _norm_xy_t(metric, dxy, tau, n)
        cval = float(f.value_rows[u][0])
        upper = np.minimum(upper, cval + lip * dist)
        lower = np.maximum(lower, cval - lip * dist)

    if np.any(lower > upper + _EQ_TOL):
        raise ValueError("envelope order violated; prescribed data is not "
                         "consistent with the declared budget")

    shape = f.grid.shape
    up_f = SampledFunction(s, f.grid, upper.reshape(shape + (1,)),
                           interpolation=f.interpolation)
    lo_f = SampledFunction(s, f.grid, lower.reshape(shape + (1,)),
                           interpolation=f.interpolation)

    phi = f.value_rows[:, 0]
    equality = f.active & (np.abs(upper - phi) <= _EQ_TOL) & \
        (np.abs(lower - phi) <= _EQ_TOL)
    bad = emask & ~equality
    if np.any(bad):
        worst = float(np.max(np.abs(upper[emask] - phi[emask])))
        raise ValueError(f"extension failed to reproduce prescribed values "
                         f"(max deviation {worst:.2e})")

    lip_up = lipschitz_constant(up_f, metric)
    lip_lo = lipschitz_constant(lo_f, metric)
    return ExtensionResult(upper=up_f, lower=lo_f,
                           prescribed=emask.reshape(shape),
                           equality=equality.reshape(shape),
                           lip_upper=lip_up.value, lip_lower=lip_lo.value,
                           declared_lip=lip)


# ---------------------------------------------------------------------------
# sandwich harness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SandwichRecord:
    """Differential estimates of an ordered triple touching at a point."""

    lower: DiffEstimate
    middle: DiffEstimate
    upper: DiffEstimate
    band: float                   # Frobenius gap between outer matrices
    combined_residual: float      # sum of the outer final residuals
    band_ok: bool                 # outer gap within twice the combined residual
    middle_in_band: bool          # middle inside the entrywise band + slack
    violation: bool


def sandwich_harness(lower_f: SampledFunction, middle_f: SampledFunction,
                     upper_f: SampledFunction, wbar: np.ndarray, radii,
                     metric: Metric = INFINITY, tol: float = 0.05,
                     decay_factor: float = 1.5) -> SandwichRecord:
    """Compare differential fits of psi <= phi <= eta pinched at ``wbar``.

    Rejects inputs that are not ordered on the common active set or do not
    touch at the base point; flags a violation when the middle fit leaves
    the entrywise band of the outer fits by more than the combined final
    residuals.
    """
    if lower_f.splitting.k != 1:
        raise ValueError("the sandwich needs a 1-dimensional V")
    act = lower_f.active & middle_f.active & upper_f.active
    lo = lower_f.value_rows[act, 0]
    mid = middle_f.value_rows[act, 0]
    up = upper_f.value_rows[act, 0]
    if np.any(lo > mid + _EQ_TOL) or np.any(mid > up + _EQ_TOL):
        raise ValueError("functions are not ordered lower <= middle <= upper")
    vals = [f.evaluate(wbar) for f in (lower_f, middle_f, upper_f)]
    if not all(ok for _, ok in vals):
        raise ValueError("base point outside a common active domain")
    v = np.array([float(val[0]) for val, _ in vals])
    if np.max(v) - np.min(v) > 1e-9:
        raise ValueError("functions do not touch at the base point")

    est_lo = estimate_differential(lower_f, wbar, radii, metric, tol, decay_factor)
    est_mid = estimate_differential(middle_f, wbar, radii, metric, tol, decay_factor)
    est_up = estimate_differential(upper_f, wbar, radii, metric, tol, decay_factor)

    band = float(np.linalg.norm(est_up.matrix - est_lo.matrix))
    combined = float(est_lo.residuals[-1] + est_up.residuals[-1])
    band_ok = band < 2.0 * combined + 1e-12
    box_lo = np.minimum(est_lo.matrix, est_up.matrix) - combined - 1e-12
    box_hi = np.maximum(est_lo.matrix, est_up.matrix) + combined + 1e-12
    in_band = bool(np.all(est_mid.matrix >= box_lo) and
                   np.all(est_mid.matrix <= box_hi))
    return SandwichRecord(lower=est_lo, middle=est_mid, upper=est_up,
                          band=band, combined_residual=combined,
                          band_ok=band_ok, middle_in_band=in_band,
                          violation=not in_band)
