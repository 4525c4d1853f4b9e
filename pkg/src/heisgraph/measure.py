"""Pushforward-measure proxy for the graph's surface measure.

The graph map carries Lebesgue measure on W to a measure on the graph that
is two-sidedly comparable to the spherical Hausdorff measure of dimension
Q - k, so ball measures are estimated as W-Lebesgue volumes of metric-ball
preimages.  Estimation is plain hit counting on a bounding box with exact
binomial error bars; sampling is chunked over counter-based substreams, so
the estimate for a given (seed, samples) is bit-identical under any
execution schedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import group
from .graph import SampledFunction
from .group import Point
from .metrics import INFINITY, Metric, norm_coords
from .rng import uniform_box

__all__ = [
    "MeasureEstimate",
    "AhlforsProfile",
    "DensityProfile",
    "BoundingBoxError",
    "pushforward_ball_measure",
    "ahlfors_profile",
    "density_profile",
]


class BoundingBoxError(RuntimeError):
    """The ball preimage still touched the sampling box after one retry."""


@dataclass(frozen=True)
class MeasureEstimate:
    """Monte-Carlo estimate of the W-volume of a graph-ball preimage."""

    center: np.ndarray          # graph point coordinates
    radius: float
    samples: int
    estimate: float
    stderr: float
    box_lo: np.ndarray
    box_hi: np.ndarray
    enlarged: bool

    def __post_init__(self):
        if self.estimate < 0 or not math.isfinite(self.stderr):
            raise ValueError("estimate must be nonnegative with finite stderr")


def _initial_box(f: SampledFunction, p: np.ndarray, r: float):
    """Axis box in W-coordinates guaranteed to contain the ball preimage.

    Frame offsets are bounded by the radius; the t-offset additionally
    absorbs the symplectic shear, bounded by the horizontal extent of the
    box and of the graph values.
    """
    s = f.splitting
    w_part, _ = s.project_coords(p)
    center = s.w_coefficients(w_part)
    d = f.grid.ndim
    lo = np.empty(d)
    hi = np.empty(d)
    margin = 1.05 * r
    lo[:-1] = center[:-1] - margin
    hi[:-1] = center[:-1] + margin
    vmax = float(np.max(np.linalg.norm(f.value_rows[f.active], axis=-1), initial=0.0))
    pxy = float(np.linalg.norm(p[: 2 * s.n]))
    cxy = float(np.linalg.norm(center[:-1]))
    shear = 1.1 * r * (pxy + cxy + vmax + r) + 0.3 * r * r + 1e-9
    lo[-1] = center[-1] - shear
    hi[-1] = center[-1] + shear
    return lo, hi


def _count_hits(f: SampledFunction, p: np.ndarray, r: float, samples: int,
                seed: int, path: tuple, lo: np.ndarray, hi: np.ndarray,
                metric: Metric, emask: Optional[np.ndarray] = None):
    """(hits, masked_hits, boundary_hits) for uniform samples in the box."""
    s = f.splitting
    n = s.n
    hits = 0
    sub_hits = 0
    boundary = 0
    chunk = 1 << 16
    shell = 0.01 * (hi - lo)
    flat_emask = None if emask is None else np.asarray(emask, dtype=bool).reshape(-1)
    strides = None
    if flat_emask is not None:
        strides = np.array([int(np.prod(f.grid.shape[a + 1:]))
                            for a in range(f.grid.ndim)])
    for start in range(0, samples, chunk):
        stop = min(start + chunk, samples)
        w = uniform_box(seed, path + (start // chunk,), stop - start, lo, hi)
        vals, valid = f.evaluate(w)
        pts = group.mul(s.embed_w(w), s.embed_v(vals), n)
        dist = norm_coords(metric, group.mul(group.inv(p), pts, n), n)
        hit = valid & (dist < r)
        hits += int(np.count_nonzero(hit))
        if hit.any():
            near = np.any((w[hit] < lo + shell) | (w[hit] > hi - shell), axis=1)
            boundary += int(np.count_nonzero(near))
        if flat_emask is not None and hit.any():
            h = f.grid.spacings
            los = np.array([a.lo for a in f.grid.axes])
            idx = np.rint((w[hit] - los) / h).astype(int)
            idx = np.clip(idx, 0, np.array(f.grid.shape) - 1)
            sub_hits += int(np.count_nonzero(flat_emask[idx @ strides]))
    return hits, sub_hits, boundary


def _ball_measure(f: SampledFunction, pc: np.ndarray, r: float, samples: int,
                  seed: int, metric: Metric, emask: Optional[np.ndarray],
                  path: tuple):
    if not r > 0:
        raise ValueError("radius must be positive")
    if samples < 1:
        raise ValueError("need at least one sample")
    lo, hi = _initial_box(f, pc, r)
    enlarged = False
    hits, sub, boundary = _count_hits(f, pc, r, samples, seed,
                                      path + (0,), lo, hi, metric, emask)
    if boundary > 0:
        enlarged = True
        span = hi - lo
        lo = lo - 0.5 * span
        hi = hi + 0.5 * span
        hits, sub, boundary = _count_hits(f, pc, r, samples, seed,
                                          path + (1,), lo, hi, metric, emask)
        if boundary > 0:
            raise BoundingBoxError(
                "ball preimage reaches the enlarged sampling box boundary")
    vol = float(np.prod(hi - lo))
    frac = hits / samples
    est = vol * frac
    err = vol * math.sqrt(max(frac * (1.0 - frac), 0.0) / samples)
    result = MeasureEstimate(center=pc, radius=float(r), samples=samples,
                             estimate=est, stderr=err, box_lo=lo, box_hi=hi,
                             enlarged=enlarged)
    return result, vol * sub / samples


def pushforward_ball_measure(f: SampledFunction, p: Point, r: float,
                             samples: int, seed: int,
                             metric: Metric = INFINITY,
                             _path: tuple = ()) -> MeasureEstimate:
    """W-Lebesgue volume of {w : d(graph point(w), p) < r} by hit counting.

    The bounding box is enlarged and the sampling retried once if ball hits
    show up in its outer shell; a second failure raises.  Preimage pieces
    cut off by the active mask are simply not hits, matching the measure of
    the graph over the active domain.
    """
    pc = p.coords if isinstance(p, Point) else np.asarray(p, dtype=float)
    result, _ = _ball_measure(f, pc, r, samples, seed, metric, None, _path)
    return result


@dataclass(frozen=True)
class AhlforsProfile:
    """Ball-measure to (2r)^(Q-k) ratios across radii, with error bars."""

    radii: np.ndarray
    estimates: np.ndarray
    stderrs: np.ndarray
    ratios: np.ndarray
    ratio_errs: np.ndarray
    ratio_min: float
    ratio_max: float
    monotone_ok: bool            # estimates nondecreasing in r up to 3 sigma


def ahlfors_profile(f: SampledFunction, p: Point, radii, samples: int,
                    seed: int, metric: Metric = INFINITY) -> AhlforsProfile:
    """Regularity diagnostic: mu(B(p, r)) / (2r)^(Q-k) across radii."""
    radii = np.asarray(sorted(radii), dtype=float)
    if np.any(radii <= 0):
        raise ValueError("radii must be positive")
    if radii.max() / radii.min() < 10.0 * (1 - 1e-12):
        raise ValueError("radii must span at least one decade")
    s = f.splitting
    exponent = group.homogeneous_dimension(s.n) - s.k
    ests = np.empty(len(radii))
    errs = np.empty(len(radii))
    for i, r in enumerate(radii):
        m = pushforward_ball_measure(f, p, float(r), samples, seed,
                                     metric, _path=(0xA1F, i))
        ests[i] = m.estimate
        errs[i] = m.stderr
    ratios = ests / (2.0 * radii) ** exponent
    ratio_errs = errs / (2.0 * radii) ** exponent
    mono = bool(np.all(ests[1:] >= ests[:-1] - 3.0 * (errs[1:] + errs[:-1])))
    return AhlforsProfile(radii=radii, estimates=ests, stderrs=errs,
                          ratios=ratios, ratio_errs=ratio_errs,
                          ratio_min=float(ratios.min()),
                          ratio_max=float(ratios.max()),
                          monotone_ok=mono)


@dataclass(frozen=True)
class DensityProfile:
    """Fraction of ball measure carried by a marked subset, per radius."""

    radii: np.ndarray
    densities: np.ndarray        # NaN where the denominator had no hits
    skipped: np.ndarray          # flags for radii with empty denominators


def density_profile(emask: np.ndarray, f: SampledFunction, p: Point, radii,
                    samples: int, seed: int,
                    metric: Metric = INFINITY) -> DensityProfile:
    """Density of the marked node set at ``p`` with respect to the proxy.

    Hits are attributed to the subset through the nearest grid node.  The
    graph point must sit over a marked node.
    """
    emask = np.asarray(emask, dtype=bool)
    s = f.splitting
    w_part, _ = s.project_coords(p.coords if isinstance(p, Point) else p)
    center = s.w_coefficients(w_part)
    h = f.grid.spacings
    los = np.array([a.lo for a in f.grid.axes])
    idx = np.clip(np.rint((center - los) / h).astype(int), 0,
                  np.array(f.grid.shape) - 1)
    if not emask[tuple(idx)]:
        raise ValueError("base point is not over the marked set")
    radii = np.asarray(sorted(radii), dtype=float)
    dens = np.full(len(radii), np.nan)
    skipped = np.zeros(len(radii), dtype=bool)
    pc = p.coords if isinstance(p, Point) else np.asarray(p, dtype=float)
    for i, r in enumerate(radii):
        est, sub = _ball_measure(f, pc, float(r), samples, seed, metric,
                                 emask, (0xDE2, i))
        if est.estimate <= 0:
            skipped[i] = True
            continue
        dens[i] = sub / est.estimate
    return DensityProfile(radii=radii, densities=dens, skipped=skipped)
