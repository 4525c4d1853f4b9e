"""Registry of built-in test functions.

Each entry documents the analytic intrinsic-Lipschitz / differentiability
status that the verification suites rely on.  Functions oriented W -> V take
(N, 2n-k+1) arrays of W-coordinates (frame coefficients plus t) and return
(N, k) value arrays; functions oriented V -> W take (N, k) arrays of
V-coordinates and return (N, 2n-k+1) arrays of W-coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .extension import ConeBoundary
from .graph import Grid, SampledFunction, VOrientedFunction
from .group import Point
from .metrics import INFINITY
from .splitting import Splitting

__all__ = ["BuiltinEntry", "REGISTRY", "list_builtins", "make_callable",
           "make_sampled", "make_v_oriented"]


@dataclass(frozen=True)
class BuiltinEntry:
    name: str
    orientation: str                      # "w_to_v" | "v_to_w"
    make: Callable                        # (splitting, **params) -> callable
    params: tuple = ()
    defaults: dict = field(default_factory=dict)
    intrinsic_lipschitz: Optional[bool] = None
    differentiable_at_zero: Optional[bool] = None
    notes: str = ""


def _zero(splitting: Splitting):
    k = splitting.k

    def fn(w):
        w = np.atleast_2d(np.asarray(w, dtype=float))
        return np.zeros((w.shape[0], k))
    return fn


def _constant(splitting: Splitting, value=(1.0,)):
    value = np.asarray(value, dtype=float).reshape(splitting.k)

    def fn(w):
        w = np.atleast_2d(np.asarray(w, dtype=float))
        return np.tile(value, (w.shape[0], 1))
    return fn


def _intrinsic_linear(splitting: Splitting, matrix=((1.0,),)):
    m = np.asarray(matrix, dtype=float).reshape(
        splitting.k, 2 * splitting.n - splitting.k)

    def fn(w):
        w = np.atleast_2d(np.asarray(w, dtype=float))
        return w[:, :-1] @ m.T
    return fn


def _vertical_coordinate(splitting: Splitting):
    if splitting.k != 1:
        raise ValueError("vertical_coordinate needs k = 1")

    def fn(w):
        w = np.atleast_2d(np.asarray(w, dtype=float))
        return w[:, -1:].copy()
    return fn


def _sqrt_cusp(splitting: Splitting, axis: int = 0):
    if splitting.k != 1:
        raise ValueError("sqrt_cusp needs k = 1")

    def fn(w):
        w = np.atleast_2d(np.asarray(w, dtype=float))
        return np.sqrt(np.abs(w[:, axis:axis + 1]))
    return fn


def _cone_boundary(splitting: Splitting, vertex=None, beta: float = 1.0):
    if splitting.k != 1:
        raise ValueError("cone_boundary needs k = 1")
    if vertex is None:
        vertex = np.zeros(2 * splitting.n + 1)
    vtx = Point.from_coords(splitting.n, np.asarray(vertex, dtype=float))
    gf = ConeBoundary(splitting, vtx, float(beta))

    def fn(w):
        w = np.atleast_2d(np.asarray(w, dtype=float))
        return gf.value(w, INFINITY)[:, None]
    return fn


def _bump_linear(splitting: Splitting, matrix=((0.5,),), amplitude: float = 0.1,
                 width: float = 0.4, center=None):
    d = 2 * splitting.n - splitting.k + 1
    lin = _intrinsic_linear(splitting, matrix)
    if center is None:
        center = np.zeros(d)
    center = np.asarray(center, dtype=float).reshape(d)

    def fn(w):
        w = np.atleast_2d(np.asarray(w, dtype=float))
        out = lin(w)
        bump = amplitude * np.exp(-np.sum(((w - center) / width) ** 2, axis=1))
        out[:, 0] += bump
        return out
    return fn


def _v_zero(splitting: Splitting):
    d = 2 * splitting.n - splitting.k + 1

    def fn(v):
        v = np.atleast_2d(np.asarray(v, dtype=float))
        return np.zeros((v.shape[0], d))
    return fn


def _v_linear(splitting: Splitting, slope: float = 1.0):
    # graph map lands on {(x, slope x, 0)} = exp(x(X_1 + slope Y_1)); the
    # t-component of the W-value cancels the product twist
    if splitting.k != 1 or splitting.n != 1:
        raise ValueError("v_linear is defined for n = 1, k = 1")

    def fn(v):
        v = np.atleast_2d(np.asarray(v, dtype=float))
        out = np.empty((v.shape[0], 2))
        out[:, 0] = slope * v[:, 0]
        out[:, 1] = -0.5 * slope * v[:, 0] ** 2
        return out
    return fn


def _v_affine(splitting: Splitting, offset: float = 0.2, slope: float = 1.0):
    # graph map lands on the left coset (0, offset, 0) * {(x, slope x, 0)}
    if splitting.k != 1 or splitting.n != 1:
        raise ValueError("v_affine is defined for n = 1, k = 1")

    def fn(v):
        v = np.atleast_2d(np.asarray(v, dtype=float))
        x = v[:, 0]
        out = np.empty((v.shape[0], 2))
        out[:, 0] = offset + slope * x
        out[:, 1] = -offset * x - 0.5 * slope * x ** 2
        return out
    return fn


def _v_cusp(splitting: Splitting):
    # W-increment of order sqrt|v|: the graph map is not metric Lipschitz at 0
    if splitting.k != 1 or splitting.n != 1:
        raise ValueError("v_cusp is defined for n = 1, k = 1")

    def fn(v):
        v = np.atleast_2d(np.asarray(v, dtype=float))
        out = np.zeros((v.shape[0], 2))
        out[:, 1] = np.abs(v[:, 0])
        return out
    return fn


REGISTRY: dict[str, BuiltinEntry] = {
    e.name: e for e in [
        BuiltinEntry(
            "zero", "w_to_v", _zero,
            intrinsic_lipschitz=True, differentiable_at_zero=True,
            notes="constant 0; Lipschitz constant 0, differential 0"),
        BuiltinEntry(
            "constant", "w_to_v", _constant, params=("value",),
            defaults={"value": (1.0,)},
            intrinsic_lipschitz=True, differentiable_at_zero=True,
            notes="V-increments vanish, Lipschitz constant 0, differential 0"),
        BuiltinEntry(
            "intrinsic_linear", "w_to_v", _intrinsic_linear, params=("matrix",),
            defaults={"matrix": ((1.0,),)},
            intrinsic_lipschitz=True, differentiable_at_zero=True,
            notes="graph is a homogeneous subgroup; for n=k=1 the constant "
                  "under the infinity gauge is |m|, differential m"),
        BuiltinEntry(
            "vertical_coordinate", "w_to_v", _vertical_coordinate,
            intrinsic_lipschitz=False, differentiable_at_zero=True,
            notes="phi = t (n = 1): differentiable at 0 with differential 0 "
                  "(ratio bounded by sqrt|t|/2); constants grow with |t| so "
                  "not globally intrinsic Lipschitz"),
        BuiltinEntry(
            "sqrt_cusp", "w_to_v", _sqrt_cusp, params=("axis",),
            defaults={"axis": 0},
            intrinsic_lipschitz=False, differentiable_at_zero=False,
            notes="phi = sqrt|y| (n = 1): increment ratios ~ |y|^{-1/2} "
                  "diverge at 0; not Lipschitz at 0, no cone works there"),
        BuiltinEntry(
            "cone_boundary", "w_to_v", _cone_boundary, params=("vertex", "beta"),
            defaults={"vertex": None, "beta": 1.0},
            intrinsic_lipschitz=True, differentiable_at_zero=False,
            notes="upper boundary of the cone at the vertex; intrinsic "
                  "Lipschitz with constant tied to 1/beta, first-order "
                  "kink at the apex"),
        BuiltinEntry(
            "bump_linear", "w_to_v", _bump_linear,
            params=("matrix", "amplitude", "width", "center"),
            defaults={"matrix": ((0.5,),), "amplitude": 0.1, "width": 0.4,
                      "center": None},
            intrinsic_lipschitz=True, differentiable_at_zero=True,
            notes="linear part plus a smooth Gaussian bump; intrinsic "
                  "Lipschitz on bounded grids"),
        BuiltinEntry(
            "v_zero", "v_to_w", _v_zero,
            intrinsic_lipschitz=True, differentiable_at_zero=True,
            notes="graph map is the identity embedding of V; metric "
                  "ratio identically 1"),
        BuiltinEntry(
            "v_linear", "v_to_w", _v_linear, params=("slope",),
            defaults={"slope": 1.0},
            intrinsic_lipschitz=True, differentiable_at_zero=True,
            notes="graph is the horizontal subgroup exp(x(X_1 + c Y_1)); "
                  "dilation quotients are exactly constant"),
        BuiltinEntry(
            "v_affine", "v_to_w", _v_affine, params=("offset", "slope"),
            defaults={"offset": 0.2, "slope": 1.0},
            intrinsic_lipschitz=True, differentiable_at_zero=True,
            notes="smooth affine data; quotient schedules are Cauchy"),
        BuiltinEntry(
            "v_cusp", "v_to_w", _v_cusp,
            intrinsic_lipschitz=False, differentiable_at_zero=False,
            notes="W-value with t = |v|: graph-map increments ~ sqrt|v| "
                  "give a diverging metric profile at 0"),
    ]
}


def list_builtins() -> list:
    """Registry entries sorted by name."""
    return [REGISTRY[k] for k in sorted(REGISTRY)]


def make_callable(name: str, splitting: Splitting, **params):
    if name not in REGISTRY:
        raise KeyError(f"unknown builtin {name!r}")
    entry = REGISTRY[name]
    bad = set(params) - set(entry.params)
    if bad:
        raise ValueError(f"builtin {name!r} does not take {sorted(bad)}")
    kw = dict(entry.defaults)
    kw.update(params)
    return entry.make(splitting, **kw)


def make_sampled(name: str, splitting: Splitting, grid: Grid,
                 mask=None, interpolation: str = "multilinear",
                 **params) -> SampledFunction:
    entry = REGISTRY.get(name)
    if entry is None:
        raise KeyError(f"unknown builtin {name!r}")
    if entry.orientation != "w_to_v":
        raise ValueError(f"builtin {name!r} is oriented V -> W")
    fn = make_callable(name, splitting, **params)
    return SampledFunction.from_callable(splitting, grid, fn, mask, interpolation)


def make_v_oriented(name: str, splitting: Splitting, grid: Grid,
                    mask=None, interpolation: str = "multilinear",
                    **params) -> VOrientedFunction:
    entry = REGISTRY.get(name)
    if entry is None:
        raise KeyError(f"unknown builtin {name!r}")
    if entry.orientation != "v_to_w":
        raise ValueError(f"builtin {name!r} is oriented W -> V")
    fn = make_callable(name, splitting, **params)
    return VOrientedFunction.from_callable(splitting, grid, fn, mask, interpolation)
