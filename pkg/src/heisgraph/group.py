"""Exact arithmetic in the Heisenberg group H^n.

Points are written in exponential coordinates (x, y, t), x and y in R^n, t
real.  The product adds horizontal parts and twists the vertical coordinate
by half the standard symplectic form; dilations scale the horizontal layer
linearly and the vertical one quadratically.  Batch helpers operate on
arrays with coordinate layout ``[x_1..x_n, y_1..y_n, t]`` along the last
axis; the :class:`Point` wrapper is the single-point API used at module
boundaries.  All operations are pure functions in double precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Point",
    "HorizontalControl",
    "homogeneous_dimension",
    "identity",
    "multiply",
    "inverse",
    "dilate",
    "conjugate",
    "flow_horizontal",
    "mul",
    "inv",
    "dil",
    "omega",
]


def homogeneous_dimension(n: int) -> int:
    """Scaling exponent of Lebesgue measure under dilations: Q = 2n + 2."""
    return 2 * n + 2


# ---------------------------------------------------------------------------
# batch operations on coordinate arrays of shape (..., 2n+1)
# ---------------------------------------------------------------------------

def omega(u: np.ndarray, v: np.ndarray, n: int) -> np.ndarray:
    """Standard symplectic form <u_x, v_y> - <v_x, u_y> of horizontal vectors."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.sum(u[..., :n] * v[..., n : 2 * n], axis=-1) - np.sum(
        v[..., :n] * u[..., n : 2 * n], axis=-1
    )


def mul(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    """Group product of coordinate arrays (broadcasting)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    shape = np.broadcast_shapes(a.shape, b.shape)
    out = np.empty(shape)
    out[..., : 2 * n] = a[..., : 2 * n] + b[..., : 2 * n]
    out[..., 2 * n] = a[..., 2 * n] + b[..., 2 * n] + 0.5 * omega(a, b, n)
    return out


def inv(a: np.ndarray) -> np.ndarray:
    """Group inverse: coordinate negation."""
    return -np.asarray(a, dtype=float)


def dil(lam: float, a: np.ndarray, n: int) -> np.ndarray:
    """Intrinsic dilation (lambda x, lambda y, lambda^2 t)."""
    a = np.asarray(a, dtype=float)
    out = np.empty(a.shape)
    out[..., : 2 * n] = lam * a[..., : 2 * n]
    out[..., 2 * n] = (lam * lam) * a[..., 2 * n]
    return out


# ---------------------------------------------------------------------------
# single-point API
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Point:
    """A point of H^n in exponential coordinates."""

    n: int
    x: np.ndarray
    y: np.ndarray
    t: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("group index n must be a positive integer")
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        y = np.atleast_1d(np.asarray(self.y, dtype=float))
        if x.shape != (self.n,) or y.shape != (self.n,):
            raise ValueError(f"x and y must have shape ({self.n},)")
        t = float(self.t)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y)) and np.isfinite(t)):
            raise ValueError("point coordinates must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "t", t)

    @property
    def coords(self) -> np.ndarray:
        """Coordinate vector [x, y, t] of length 2n+1."""
        return np.concatenate([self.x, self.y, [self.t]])

    @classmethod
    def from_coords(cls, n: int, coords: np.ndarray) -> "Point":
        coords = np.asarray(coords, dtype=float)
        if coords.shape != (2 * n + 1,):
            raise ValueError(f"expected {2 * n + 1} coordinates for H^{n}")
        return cls(n, coords[:n], coords[n : 2 * n], coords[2 * n])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Point)
            and self.n == other.n
            and bool(np.all(self.coords == other.coords))
        )

    def __repr__(self) -> str:
        return f"Point(n={self.n}, x={self.x.tolist()}, y={self.y.tolist()}, t={self.t})"


def identity(n: int) -> Point:
    return Point(n, np.zeros(n), np.zeros(n), 0.0)


def _check_same_group(p: Point, q: Point):
    if p.n != q.n:
        raise ValueError(f"group index mismatch: {p.n} != {q.n}")


def multiply(p: Point, q: Point) -> Point:
    """Group product p * q."""
    _check_same_group(p, q)
    return Point.from_coords(p.n, mul(p.coords, q.coords, p.n))


def inverse(p: Point) -> Point:
    return Point(p.n, -p.x, -p.y, -p.t)


def dilate(lam: float, p: Point) -> Point:
    """Intrinsic dilation by lambda > 0."""
    if not (lam > 0 and np.isfinite(lam)):
        raise ValueError("dilation factor must be a positive finite real")
    return Point(p.n, lam * p.x, lam * p.y, lam * lam * p.t)


def conjugate(g: Point, p: Point) -> Point:
    """g * p * g^{-1}."""
    _check_same_group(g, p)
    return multiply(multiply(g, p), inverse(g))


# ---------------------------------------------------------------------------
# horizontal flows
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HorizontalControl:
    """Piecewise-constant horizontal control: segments of (h, duration).

    Each ``h`` is a vector of 2n reals giving the constant coefficients of
    the left-invariant horizontal frame; flowing it for time s translates on
    the right by the one-parameter subgroup element (s*h, 0).
    """

    n: int
    segments: tuple = field(default_factory=tuple)

    def __post_init__(self):
        cleaned = []
        for h, duration in self.segments:
            h = np.asarray(h, dtype=float)
            if h.shape != (2 * self.n,):
                raise ValueError(f"control vector must have 2n = {2 * self.n} entries")
            duration = float(duration)
            if not (duration >= 0 and np.isfinite(duration)):
                raise ValueError("segment duration must be a finite nonnegative real")
            if not np.all(np.isfinite(h)):
                raise ValueError("control vector must be finite")
            cleaned.append((h, duration))
        total = sum(d for _, d in cleaned)
        if not np.isfinite(total):
            raise ValueError("total duration must be finite")
        object.__setattr__(self, "segments", tuple(cleaned))

    def concatenate(self, other: "HorizontalControl") -> "HorizontalControl":
        if self.n != other.n:
            raise ValueError("control dimension mismatch")
        return HorizontalControl(self.n, self.segments + other.segments)

    def cost(self) -> float:
        """L^1-in-time control cost: sum of |h| * duration."""
        return float(sum(np.linalg.norm(h) * d for h, d in self.segments))


def flow_horizontal(p: Point, control: HorizontalControl) -> Point:
    """Endpoint of the horizontal flow of ``control`` started at ``p``.

    Constant-control integral curves of the left-invariant horizontal frame
    are right translations by one-parameter subgroup elements, so the
    endpoint is an exact finite product of group elements.
    """
    if p.n != control.n:
        raise ValueError("control dimension mismatch")
    n = p.n
    q = p.coords
    for h, duration in control.segments:
        step = np.concatenate([duration * h, [0.0]])
        q = mul(q, step, n)
    return Point.from_coords(n, q)
