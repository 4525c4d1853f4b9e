"""Intrinsic graphs of sampled functions and their Lipschitz diagnostics.

A function phi from a vertical subgroup W into a horizontal complement V is
held on an axis-aligned grid in W-coordinates (w_frame coefficients plus t).
Its intrinsic graph is the set of points w * phi(w).  The module computes:

* the graph quasi-distance (symmetrised W-component norm of graph-point
  increments),
* global and pointwise intrinsic Lipschitz constants via exact pair scans
  (with an optional, result-preserving pruning bound),
* the classification of grid nodes by the smallest cone level whose cone
  misses the local graph (the pointwise intrinsic Lipschitz set, resolved up
  to the level cap and the grid resolution),
* graph translation moving a base point to the origin, and
* metric Lipschitz profiles of graph maps for functions oriented V -> W.

The scans use a closed form for the components of p_a^{-1} p_b: the
V-component is the coefficient difference of the values, and the W-component
is w_a^{-1} w_b conjugated by the value at a, which shears only the
t-coordinate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from . import group
from .group import Point
from .metrics import INFINITY, Metric, norm_coords
from .splitting import Splitting

__all__ = [
    "Axis",
    "Grid",
    "SampledFunction",
    "VOrientedFunction",
    "LipschitzConstant",
    "LipReport",
    "graph_point",
    "graph_quasidistance",
    "quasidistance_coords",
    "lipschitz_constant",
    "pointwise_lip_profile",
    "classify_stepanov",
    "stepanov_condition",
    "translate_function",
    "graphmap_metric_lip_profile",
]

_CONE_SLACK = 1e-12
_SNAP = 1e-9
_INF_RATIO = 1e6  # V-increment exceeding 1e6 x W-increment flags infinity


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Axis:
    lo: float
    hi: float
    count: int

    def __post_init__(self):
        if self.count < 2:
            raise ValueError("grid axes need at least 2 nodes")
        if not (np.isfinite(self.lo) and np.isfinite(self.hi) and self.hi > self.lo):
            raise ValueError("axis bounds must be finite with hi > lo")

    @property
    def spacing(self) -> float:
        return (self.hi - self.lo) / (self.count - 1)

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.count)

    def shifted(self, offset: float) -> "Axis":
        return Axis(self.lo - offset, self.hi - offset, self.count)


@dataclass(frozen=True)
class Grid:
    axes: tuple

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))

    @property
    def ndim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple:
        return tuple(a.count for a in self.axes)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def spacings(self) -> np.ndarray:
        return np.array([a.spacing for a in self.axes])

    @cached_property
    def node_coords(self) -> np.ndarray:
        """All node coordinates, shape (size, ndim), row-major node order."""
        mesh = np.meshgrid(*[a.values() for a in self.axes], indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def flat_index(self, multi: tuple) -> int:
        return int(np.ravel_multi_index(multi, self.shape))


def _grid_evaluate(grid: Grid, values: np.ndarray, mask: np.ndarray,
                   interpolation: str, coords: np.ndarray):
    """Evaluate grid data at arbitrary coordinates.

    Returns (vals, valid).  Multilinear weights within 1e-9 of a node snap to
    it, so on-node queries reproduce stored values exactly; corners with zero
    weight are not required to be inside the mask.
    """
    coords = np.asarray(coords, dtype=float)
    single = coords.ndim == 1
    pts = np.atleast_2d(coords)
    m, d = pts.shape
    if d != grid.ndim:
        raise ValueError("coordinate dimension does not match the grid")
    los = np.array([a.lo for a in grid.axes])
    counts = np.array([a.count for a in grid.axes])
    h = grid.spacings
    f = (pts - los) / h
    inside = np.all((f > -_SNAP) & (f < counts - 1 + _SNAP), axis=1)
    f = np.clip(f, 0.0, (counts - 1).astype(float))
    k = values.shape[-1]
    vals = np.zeros((m, k))
    flat_vals = values.reshape(-1, k)
    flat_mask = mask.reshape(-1)

    if interpolation == "nearest":
        idx = np.rint(f).astype(int)
        flat = np.ravel_multi_index(idx.T, grid.shape)
        valid = inside & flat_mask[flat]
        vals[valid] = flat_vals[flat[valid]]
    elif interpolation == "multilinear":
        i0 = np.minimum(f.astype(int), counts - 2)
        frac = f - i0
        frac[frac < _SNAP] = 0.0
        frac[frac > 1.0 - _SNAP] = 1.0
        valid = inside.copy()
        strides = np.array([int(np.prod(grid.shape[a + 1:])) for a in range(d)])
        base = i0 @ strides
        for corner in range(1 << d):
            bits = np.array([(corner >> a) & 1 for a in range(d)])
            wgt = np.prod(np.where(bits, frac, 1.0 - frac), axis=1)
            flat = base + bits @ strides
            used = wgt > 1e-12
            ok = ~used | flat_mask[flat]
            valid &= ok
            vals += np.where(used, wgt, 0.0)[:, None] * flat_vals[flat]
        vals[~valid] = 0.0
    else:
        raise ValueError("interpolation must be 'nearest' or 'multilinear'")

    if single:
        return vals[0], bool(valid[0])
    return vals, valid


# ---------------------------------------------------------------------------
# sampled functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SampledFunction:
    """phi: A subset of W -> V on a grid of W-coordinates (frame coeffs, t)."""

    splitting: Splitting
    grid: Grid
    values: np.ndarray                  # grid.shape + (k,)
    mask: Optional[np.ndarray] = None
    interpolation: str = "multilinear"
    info: Optional[dict] = field(default=None, compare=False)

    def __post_init__(self):
        s = self.splitting
        d = 2 * s.n - s.k + 1
        if self.grid.ndim != d:
            raise ValueError(f"grid must have {d} axes (w_frame coefficients + t)")
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape + (s.k,):
            raise ValueError("values must have shape grid.shape + (k,)")
        mask = self.mask
        if mask is None:
            mask = np.ones(self.grid.shape, dtype=bool)
        else:
            mask = np.asarray(mask, dtype=bool)
            if mask.shape != self.grid.shape:
                raise ValueError("mask shape must match the grid")
        if not np.all(np.isfinite(values[mask])):
            raise ValueError("values must be finite on active nodes")
        if self.interpolation not in ("nearest", "multilinear"):
            raise ValueError("interpolation must be 'nearest' or 'multilinear'")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def from_callable(cls, splitting: Splitting, grid: Grid,
                      fn: Callable[[np.ndarray], np.ndarray],
                      mask: Optional[np.ndarray] = None,
                      interpolation: str = "multilinear") -> "SampledFunction":
        vals = np.asarray(fn(grid.node_coords), dtype=float)
        vals = vals.reshape(grid.shape + (splitting.k,))
        return cls(splitting, grid, vals, mask, interpolation)

    # -- cached geometry -----------------------------------------------------

    @cached_property
    def value_rows(self) -> np.ndarray:
        return self.values.reshape(-1, self.splitting.k)

    @cached_property
    def node_points(self) -> np.ndarray:
        return self.splitting.embed_w(self.grid.node_coords)

    @cached_property
    def graph_points(self) -> np.ndarray:
        return group.mul(self.node_points, self.splitting.embed_v(self.value_rows),
                         self.splitting.n)

    @cached_property
    def active(self) -> np.ndarray:
        return self.mask.reshape(-1)

    def evaluate(self, coords: np.ndarray):
        """Interpolated values and validity at W-coordinates."""
        return _grid_evaluate(self.grid, self.values, self.mask,
                              self.interpolation, coords)


@dataclass(frozen=True)
class VOrientedFunction:
    """phi: A subset of V -> W; the grid axes are V-frame coefficients."""

    splitting: Splitting
    grid: Grid
    values: np.ndarray                  # grid.shape + (2n-k+1,): w coeffs + t
    mask: Optional[np.ndarray] = None
    interpolation: str = "multilinear"

    def __post_init__(self):
        s = self.splitting
        if self.grid.ndim != s.k:
            raise ValueError(f"grid must have k = {s.k} axes (v_frame coefficients)")
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape + (2 * s.n - s.k + 1,):
            raise ValueError("values must have shape grid.shape + (2n-k+1,)")
        mask = self.mask
        if mask is None:
            mask = np.ones(self.grid.shape, dtype=bool)
        else:
            mask = np.asarray(mask, dtype=bool)
        if not np.all(np.isfinite(values[mask])):
            raise ValueError("values must be finite on active nodes")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def from_callable(cls, splitting: Splitting, grid: Grid, fn,
                      mask=None, interpolation: str = "multilinear"):
        vals = np.asarray(fn(grid.node_coords), dtype=float)
        vals = vals.reshape(grid.shape + (2 * splitting.n - splitting.k + 1,))
        return cls(splitting, grid, vals, mask, interpolation)

    @cached_property
    def value_rows(self) -> np.ndarray:
        return self.values.reshape(-1, self.values.shape[-1])

    @cached_property
    def graph_points(self) -> np.ndarray:
        s = self.splitting
        return group.mul(s.embed_v(self.grid.node_coords),
                         s.embed_w(self.value_rows), s.n)

    @cached_property
    def active(self) -> np.ndarray:
        return self.mask.reshape(-1)

    def evaluate(self, coords: np.ndarray):
        return _grid_evaluate(self.grid, self.values, self.mask,
                              self.interpolation, coords)

    def graph_map(self, coords: np.ndarray):
        """Graph point(s) v * phi(v); raises off the active domain."""
        vals, valid = self.evaluate(coords)
        if not np.all(valid):
            raise ValueError("graph map evaluated outside the active domain")
        s = self.splitting
        return group.mul(s.embed_v(coords), s.embed_w(vals), s.n)


# ---------------------------------------------------------------------------
# graph-point increments
# ---------------------------------------------------------------------------

def _norm_xy_t(metric: Metric, xy: np.ndarray, t: np.ndarray, n: int) -> np.ndarray:
    if metric.kind == "infinity":
        return np.maximum(np.linalg.norm(xy, axis=-1), 2.0 * np.sqrt(np.abs(t)))
    if metric.kind == "koranyi":
        r2 = np.sum(xy * xy, axis=-1)
        return (r2 * r2 + 16.0 * t * t) ** 0.25
    coords = np.concatenate([xy, t[..., None]], axis=-1)
    return norm_coords(metric, coords, n)


def _omega_rows(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    return np.sum(a[..., :n] * b[..., n:], axis=-1) - np.sum(
        b[..., :n] * a[..., n:], axis=-1)


def _increment_parts(splitting: Splitting, wa: np.ndarray, va: np.ndarray,
                     wb: np.ndarray, vb: np.ndarray):
    """Pieces of p_a^{-1} p_b for graph points p = w * phi(w).

    Returns (dxy, tau, dval): horizontal and sheared-t parts of the
    W-component, and the V-coefficient increment.  The W-component equals
    phi(a)^{-1} (w_a^{-1} w_b) phi(a); conjugation by a horizontal element
    shifts only t, by minus the symplectic pairing.
    """
    n = splitting.n
    z0 = group.mul(group.inv(wa), wb, n)
    dxy = z0[..., : 2 * n]
    va_xy = np.asarray(va, dtype=float) @ splitting.v_frame
    tau = z0[..., 2 * n] - _omega_rows(va_xy, dxy, n)
    dval = np.asarray(vb, dtype=float) - np.asarray(va, dtype=float)
    return dxy, tau, dval


def quasidistance_coords(splitting: Splitting, wca: np.ndarray, va: np.ndarray,
                         wcb: np.ndarray, vb: np.ndarray,
                         metric: Metric = INFINITY) -> np.ndarray:
    """Graph quasi-distance for batches of W-coordinates and V-values."""
    n = splitting.n
    wa = splitting.embed_w(np.asarray(wca, dtype=float))
    wb = splitting.embed_w(np.asarray(wcb, dtype=float))
    dxy, tau_ab, _ = _increment_parts(splitting, wa, va, wb, vb)
    _, tau_ba, _ = _increment_parts(splitting, wb, vb, wa, va)
    na = _norm_xy_t(metric, dxy, tau_ab, n)
    nb = _norm_xy_t(metric, dxy, tau_ba, n)  # |-dxy| = |dxy|
    return 0.5 * (na + nb)


def graph_point(f: SampledFunction, wcoords: np.ndarray) -> Point:
    """The graph point w * phi(w); rejects coordinates off the active domain."""
    vals, valid = f.evaluate(np.asarray(wcoords, dtype=float))
    if not valid:
        raise ValueError("coordinates outside the active domain")
    s = f.splitting
    return Point.from_coords(
        s.n, group.mul(s.embed_w(wcoords), s.embed_v(vals), s.n))


def graph_quasidistance(f: SampledFunction, w1: np.ndarray, w2: np.ndarray,
                        metric: Metric = INFINITY) -> float:
    v1, ok1 = f.evaluate(w1)
    v2, ok2 = f.evaluate(w2)
    if not (ok1 and ok2):
        raise ValueError("coordinates outside the active domain")
    return float(quasidistance_coords(f.splitting, w1, v1, w2, v2, metric))


# ---------------------------------------------------------------------------
# global Lipschitz constant
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LipschitzConstant:
    """Supremum of V/W increment-norm ratios over ordered graph-point pairs."""

    value: float
    infinite: bool
    witness: Optional[tuple] = None     # flat node indices of the extremal pair
    pairs: int = 0


def lipschitz_constant(f: SampledFunction, metric: Metric = INFINITY,
                       subset: Optional[np.ndarray] = None,
                       prune: bool = True, block: int = 256) -> LipschitzConstant:
    """Exact pair scan for the intrinsic Lipschitz constant on a node set.

    ``subset`` is a boolean grid mask restricting the scan.  With ``prune``
    the scan skips pairs whose value increment already fails to beat the
    running maximum against the horizontal lower bound |dxy| <= |z_W|; this
    cannot change the result and is asserted against the plain scan in the
    tests.
    """
    s = f.splitting
    n = s.n
    active = f.active.copy()
    if subset is not None:
        active &= np.asarray(subset, dtype=bool).reshape(-1)
    idx = np.nonzero(active)[0]
    if idx.size < 2:
        raise ValueError("need at least 2 active nodes")
    W = f.node_points[idx]
    vals = f.value_rows[idx]
    vxy = vals @ s.v_frame
    wxy = W[:, : 2 * n]
    wt = W[:, 2 * n]

    best = 0.0
    witness = None
    infinite = False
    pairs = 0
    m = idx.size
    colblock = 4096
    for i0 in range(0, m, block):
        i1 = min(i0 + block, m)
        for j0 in range(i0, m, colblock):
            j1 = min(j0 + colblock, m)
            dval = vals[None, j0:j1, :] - vals[i0:i1, None, :]
            vnorm = np.linalg.norm(dval, axis=-1)
            dxy = wxy[None, j0:j1, :] - wxy[i0:i1, None, :]
            hnorm = np.linalg.norm(dxy, axis=-1)
            tri = (idx[None, j0:j1] > idx[i0:i1, None])
            if prune:
                cand = tri & (vnorm > best * hnorm)
            else:
                cand = tri
            pairs += int(np.count_nonzero(tri))
            if not cand.any():
                continue
            ii, jj = np.nonzero(cand)
            gi = i0 + ii
            gj = j0 + jj
            om = _omega_rows(wxy[gi], wxy[gj], n)
            z0t = wt[gj] - wt[gi] - 0.5 * om
            d = dxy[ii, jj]
            tau_ab = z0t - _omega_rows(vxy[gi], d, n)
            tau_ba = -z0t + _omega_rows(vxy[gj], d, n)
            na = _norm_xy_t(metric, d, tau_ab, n)
            nb = _norm_xy_t(metric, d, tau_ba, n)
            wmin = np.minimum(na, nb)
            vn = vnorm[ii, jj]
            big = vn > _INF_RATIO * wmin
            if big.any():
                infinite = True
                b = int(np.nonzero(big)[0][0])
                witness = (int(idx[gi[b]]), int(idx[gj[b]]))
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(wmin > 0, vn / wmin, np.inf)
            ratio[vn == 0] = 0.0
            kmax = int(np.argmax(ratio))
            if ratio[kmax] > best:
                best = float(ratio[kmax])
                witness = (int(idx[gi[kmax]]), int(idx[gj[kmax]]))
    return LipschitzConstant(value=best, infinite=infinite, witness=witness,
                             pairs=pairs)


# ---------------------------------------------------------------------------
# pointwise profiles and classification
# ---------------------------------------------------------------------------

def _node_increments(f: SampledFunction, base_coords: np.ndarray,
                     base_val: np.ndarray, node_idx: np.ndarray,
                     metric: Metric):
    """(dball, wnorm, vnorm) from a base W-point to graph points at nodes."""
    s = f.splitting
    n = s.n
    wbase = s.embed_w(np.asarray(base_coords, dtype=float))
    wnodes = f.node_points[node_idx]
    dball = norm_coords(metric, group.mul(group.inv(wbase), wnodes, n), n)
    dxy, tau, dval = _increment_parts(s, wbase, base_val, wnodes,
                                      f.value_rows[node_idx])
    wnorm = _norm_xy_t(metric, dxy, tau, n)
    vnorm = np.linalg.norm(dval, axis=-1)
    return dball, wnorm, vnorm


def pointwise_lip_profile(f: SampledFunction, wcoords: np.ndarray,
                          radii, metric: Metric = INFINITY) -> np.ndarray:
    """Max V/W increment ratio from ``wcoords`` over grid balls of each radius."""
    radii = np.asarray(radii, dtype=float)
    base_val, ok = f.evaluate(wcoords)
    if not ok:
        raise ValueError("coordinates outside the active domain")
    idx = np.nonzero(f.active)[0]
    dball, wnorm, vnorm = _node_increments(f, wcoords, base_val, idx, metric)
    keep = dball > 0
    dball, wnorm, vnorm = dball[keep], wnorm[keep], vnorm[keep]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(wnorm > 0, vnorm / wnorm, np.inf)
    ratio[vnorm == 0] = 0.0
    out = np.zeros(radii.shape)
    for i, r in enumerate(radii):
        sel = dball <= r
        out[i] = float(ratio[sel].max()) if sel.any() else 0.0
    return out


@dataclass(frozen=True)
class LipReport:
    """Per-node cone-level labels, ratio profiles, and the global constant.

    ``labels[i]`` is the smallest level j <= j_max at which the cone of
    opening 1/j around the graph point of node i contains no other graph
    point over the open metric ball of radius 1/j; 0 means no level worked.
    ``cells`` partitions, for each level, the labelled nodes into pieces of
    metric diameter below 1/j.
    """

    j_max: int
    radii: np.ndarray
    profiles: np.ndarray                 # (size, len(radii)); NaN off the mask
    labels: np.ndarray                   # (size,) int, 0 = unlabeled
    global_constant: float
    global_infinite: bool
    cells: Optional[dict] = None         # level -> (size,) int cell ids, -1 = outside
    cell_lipschitz: Optional[dict] = None

    @property
    def labeled_fraction(self) -> float:
        act = ~np.isnan(self.profiles[:, 0]) if self.profiles.size else np.array([])
        lab = self.labels[act] if act.size else self.labels
        return float(np.mean(lab > 0)) if lab.size else 0.0


def _window_slices(grid: Grid, multi: tuple, halfwidths: np.ndarray):
    slices = []
    for a, (i, hw) in enumerate(zip(multi, halfwidths)):
        lo = max(0, i - int(hw))
        hi = min(grid.shape[a], i + int(hw) + 1)
        slices.append(slice(lo, hi))
    return tuple(slices)


def _candidate_indices(f: SampledFunction, flat: int, radius: float,
                       metric: Metric, max_hxy: float) -> np.ndarray:
    """Flat indices of active nodes possibly within metric radius of a node.

    Horizontal frame offsets are bounded by the radius itself; the raw
    t-offset additionally absorbs the symplectic shear of the group
    difference, bounded through ``max_hxy``, the largest horizontal position
    on the grid.
    """
    grid = f.grid
    shape = grid.shape
    multi = np.unravel_index(flat, shape)
    h = grid.spacings
    r_eff = radius * (2.0 if metric.kind == "cc" else 1.0)
    halfw = np.empty(grid.ndim)
    halfw[:-1] = np.ceil(r_eff / h[:-1]) + 1
    t_bound = r_eff * r_eff / 4.0 + 0.5 * max_hxy * r_eff
    halfw[-1] = np.ceil(t_bound / h[-1]) + 1
    sl = _window_slices(grid, multi, halfw)
    block = np.zeros(shape, dtype=bool)
    block[sl] = True
    block &= f.mask
    block.reshape(-1)[flat] = False
    return np.nonzero(block.reshape(-1))[0]


def classify_stepanov(f: SampledFunction, j_max: int,
                      metric: Metric = INFINITY, radii=None,
                      with_cells: bool = True,
                      with_cell_lipschitz: bool = False,
                      with_global: bool = True) -> LipReport:
    """Label nodes by the smallest working cone level, with ratio profiles.

    For every candidate neighbour the largest level it blocks is
    ``min(jb, jc)`` where ``jb`` counts the open-ball constraint and ``jc``
    the cone constraint; the node label is one more than the largest blocked
    level.  Labels are exact for the sampled graph (one vectorised pass per
    node), and by construction monotone: the level-j condition holding
    implies it holds for every larger level.
    """
    if j_max < 1:
        raise ValueError("j_max must be >= 1")
    if radii is None:
        radii = [1.0 / j for j in (1, 2, 4, 8, 16) if j <= max(j_max, 1)]
    radii = np.asarray(sorted(radii, reverse=True), dtype=float)
    size = f.grid.size
    labels = np.zeros(size, dtype=int)
    profiles = np.full((size, len(radii)), np.nan)
    window_radius = max(1.0, float(radii.max()))
    max_hxy = float(np.max(np.linalg.norm(
        f.node_points[:, : 2 * f.splitting.n], axis=-1)))

    for flat in range(size):
        if not f.active[flat]:
            continue
        cand = _candidate_indices(f, flat, window_radius, metric, max_hxy)
        base_coords = f.grid.node_coords[flat]
        base_val = f.value_rows[flat]
        if cand.size == 0:
            labels[flat] = 1
            profiles[flat] = 0.0
            continue
        dball, wnorm, vnorm = _node_increments(f, base_coords, base_val,
                                               cand, metric)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(wnorm > 0, vnorm / wnorm, np.inf)
        ratio[vnorm == 0] = 0.0
        for i, r in enumerate(radii):
            sel = dball <= r
            profiles[flat, i] = float(ratio[sel].max()) if sel.any() else 0.0
        # largest level blocked by each candidate
        jb = np.ceil(1.0 / np.maximum(dball, 1e-300)) - 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            jc = np.where(wnorm > _CONE_SLACK,
                          np.floor(vnorm / np.maximum(wnorm - _CONE_SLACK, 1e-300)),
                          np.inf)
        jc = np.where((wnorm <= _CONE_SLACK), np.inf, jc)
        blocked = np.minimum(jb, jc)
        top = float(blocked.max()) if blocked.size else 0.0
        label = 1 + int(min(top, float(j_max)))
        labels[flat] = label if top < j_max else 0

    if with_global:
        lip = lipschitz_constant(f, metric)
        g_val, g_inf = lip.value, lip.infinite
    else:
        g_val, g_inf = math.nan, False

    cells = cell_lip = None
    if with_cells:
        cells = {}
        cell_lip = {} if with_cell_lipschitz else None
        for j in range(1, j_max + 1):
            ids = _partition_level(f, labels, j, metric)
            cells[j] = ids
            if with_cell_lipschitz:
                cell_lip[j] = _cells_lipschitz(f, ids, metric)

    return LipReport(j_max=j_max, radii=radii, profiles=profiles, labels=labels,
                     global_constant=g_val, global_infinite=g_inf,
                     cells=cells, cell_lipschitz=cell_lip)


def stepanov_condition(f: SampledFunction, flat: int, level: int,
                       metric: Metric = INFINITY) -> bool:
    """Direct check of the level-j cone condition at one node (scan oracle)."""
    if not f.active[flat]:
        raise ValueError("node is outside the active domain")
    idx = np.nonzero(f.active)[0]
    idx = idx[idx != flat]
    base_coords = f.grid.node_coords[flat]
    base_val = f.value_rows[flat]
    dball, wnorm, vnorm = _node_increments(f, base_coords, base_val, idx, metric)
    inside = dball < 1.0 / level
    in_cone = wnorm <= vnorm / level + _CONE_SLACK
    return not bool(np.any(inside & in_cone))


def _w_is_abelian(s: Splitting) -> bool:
    x, y = s.w_frame[:, : s.n], s.w_frame[:, s.n :]
    return float(np.max(np.abs(x @ y.T - y @ x.T))) < 1e-12


def _partition_level(f: SampledFunction, labels: np.ndarray, level: int,
                     metric: Metric) -> np.ndarray:
    """Split the level-j set into cells of metric diameter < 1/j."""
    member = (labels > 0) & (labels <= level)
    ids = np.full(labels.shape, -1, dtype=int)
    if not member.any():
        return ids
    idx = np.nonzero(member)[0]
    coords = f.grid.node_coords[idx]
    if _w_is_abelian(f.splitting):
        # diam of a coordinate box: max(|frame offsets|, 2 sqrt|t offset|)
        d_h = f.grid.ndim - 1
        side = 0.95 / (level * math.sqrt(max(d_h, 1)))
        t_side = (0.95 ** 2) / (4.0 * level * level)
        key = np.empty((idx.size, f.grid.ndim), dtype=int)
        key[:, :-1] = np.floor(coords[:, :-1] / side)
        key[:, -1] = np.floor(coords[:, -1] / t_side)
        _, inv = np.unique(key, axis=0, return_inverse=True)
        ids[idx] = inv
        return ids
    # greedy metric-ball clustering for a nonabelian W
    reps: list[int] = []
    assign = np.full(idx.size, -1, dtype=int)
    pts = f.node_points[idx]
    n = f.splitting.n
    for i in range(idx.size):
        placed = False
        for c, r in enumerate(reps):
            d = float(norm_coords(metric, group.mul(group.inv(pts[r]), pts[i], n), n))
            if d < 0.45 / level:
                assign[i] = c
                placed = True
                break
        if not placed:
            reps.append(i)
            assign[i] = len(reps) - 1
    ids[idx] = assign
    return ids


def _cells_lipschitz(f: SampledFunction, ids: np.ndarray, metric: Metric) -> dict:
    out = {}
    for cell in np.unique(ids[ids >= 0]):
        sel = ids == cell
        if np.count_nonzero(sel) < 2:
            out[int(cell)] = 0.0
            continue
        out[int(cell)] = lipschitz_constant(f, metric, subset=sel).value
    return out


# ---------------------------------------------------------------------------
# graph translation
# ---------------------------------------------------------------------------

def translate_function(f: SampledFunction, wbar: np.ndarray) -> SampledFunction:
    """The translated function whose graph is (wbar phi(wbar))^{-1} * graph.

    Sampled on the grid shifted so that the base point moves to the origin:
    the new value at w is phi(wbar * c w c^{-1}) - phi(wbar) with c the value
    at the base point; arguments that leave the active domain are masked out.
    """
    s = f.splitting
    n = s.n
    wbar = np.asarray(wbar, dtype=float)
    val0, ok = f.evaluate(wbar)
    if not ok:
        raise ValueError("base point outside the active domain")
    new_grid = Grid(tuple(a.shifted(c) for a, c in zip(f.grid.axes, wbar)))
    wnodes = s.embed_w(new_grid.node_coords)
    c = s.embed_v(val0)
    wbar_pt = s.embed_w(wbar)
    arg = group.mul(wbar_pt, group.mul(group.mul(c, wnodes, n), group.inv(c), n), n)
    arg_coords = s.w_coefficients(arg)
    vals, valid = f.evaluate(arg_coords)
    new_vals = (vals - val0).reshape(new_grid.shape + (s.k,))
    new_vals[~valid.reshape(new_grid.shape)] = 0.0
    # fraction of arguments landing exactly on grid nodes (interp is exact there)
    h = f.grid.spacings
    los = np.array([a.lo for a in f.grid.axes])
    frac = (arg_coords[valid] - los) / h
    on_node = np.all(np.abs(frac - np.rint(frac)) <= _SNAP, axis=-1)
    info = {
        "base": wbar.tolist(),
        "exact_node_fraction": float(np.mean(on_node)) if on_node.size else 0.0,
    }
    return SampledFunction(s, new_grid, new_vals,
                           mask=valid.reshape(new_grid.shape),
                           interpolation=f.interpolation, info=info)


# ---------------------------------------------------------------------------
# graph-map metric profile (functions oriented V -> W)
# ---------------------------------------------------------------------------

def graphmap_metric_lip_profile(g: VOrientedFunction, vbar: np.ndarray,
                                radii, metric: Metric = INFINITY) -> np.ndarray:
    """Max ratio |Phi(vbar)^{-1} Phi(v)| / |vbar^{-1} v| over balls in V.

    A bounded profile as the radius shrinks is the pointwise metric
    Lipschitz continuity of the graph map at vbar, which is equivalent to
    membership of vbar in the pointwise intrinsic Lipschitz set.
    """
    s = g.splitting
    n = s.n
    radii = np.asarray(radii, dtype=float)
    vbar = np.asarray(vbar, dtype=float)
    pbar = g.graph_map(vbar)
    idx = np.nonzero(g.active)[0]
    vnodes = g.grid.node_coords[idx]
    dv = norm_coords(metric, group.mul(group.inv(s.embed_v(vbar)),
                                       s.embed_v(vnodes), n), n)
    keep = dv > 0
    idx, dv = idx[keep], dv[keep]
    dgraph = norm_coords(metric, group.mul(group.inv(pbar),
                                           g.graph_points[idx], n), n)
    ratio = dgraph / dv
    out = np.zeros(radii.shape)
    for i, r in enumerate(radii):
        sel = dv <= r
        out[i] = float(ratio[sel].max()) if sel.any() else 0.0
    return out
