"""Hyperboloid-model primitives and right-angled hexagons.

Points of the hyperbolic plane are stored as unit timelike vectors
``X = (x, y, t)`` with ``x**2 + y**2 - t**2 = -1`` and ``t > 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

J = np.diag([1.0, 1.0, -1.0])
ORIGIN = np.array([0.0, 0.0, 1.0])


def minkowski(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Minkowski form ``u0 v0 + u1 v1 - u2 v2`` along the last axis."""
    return u[..., 0] * v[..., 0] + u[..., 1] * v[..., 1] - u[..., 2] * v[..., 2]


def left_normal(x: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Unit tangent at ``x`` obtained by rotating ``t`` a quarter turn to the left."""
    return J @ np.cross(x, t)


def distance(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Hyperbolic distance, stable for nearby points.

    Uses ``|X - Y|^2 = 4 sinh^2(d/2)`` instead of ``arccosh(-<X, Y>)``.
    """
    diff = np.asarray(x) - np.asarray(y)
    q = np.maximum(minkowski(diff, diff), 0.0)
    return 2.0 * np.arcsinh(0.5 * np.sqrt(q))


def geodesic_point(p: np.ndarray, q: np.ndarray, length: float, s: np.ndarray) -> np.ndarray:
    """Points at arclength ``s`` from ``p`` on the segment ``pq`` of given length."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    sl = math.sinh(length)
    return (np.sinh(length - s)[:, None] * p + np.sinh(s)[:, None] * q) / sl


def to_poincare(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[..., :2] / (1.0 + x[..., 2:3])


def from_poincare(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    r2 = np.sum(z * z, axis=-1, keepdims=True)
    denom = 1.0 - r2
    return np.concatenate([2.0 * z / denom, (1.0 + r2) / denom], axis=-1)


def boost_to_origin(c: np.ndarray) -> np.ndarray:
    """Lorentz boost (3x3) mapping the hyperboloid point ``c`` to the origin."""
    c = np.asarray(c, dtype=float)
    s = math.hypot(c[0], c[1])
    if s == 0.0:
        return np.eye(3)
    u = c[:2] / s
    m = np.eye(3)
    m[:2, :2] += np.outer(u, u) * (c[2] - 1.0)
    m[:2, 2] = -s * u
    m[2, :2] = -s * u
    m[2, 2] = c[2]
    return m


def normalize_timelike(v: np.ndarray) -> np.ndarray:
    return v / math.sqrt(-minkowski(v, v))


# ---------------------------------------------------------------------------
# right-angled hexagons
# ---------------------------------------------------------------------------

# (seam index j, start end i, finish end k); seams listed in boundary order.
_SEAM_ENDS = {3: (1, 2), 1: (2, 3), 2: (3, 1)}


def seam_length(
    j: int,
    alt: tuple[float, float, float],
    horo: tuple[bool, bool, bool] = (False, False, False),
) -> float:
    """Length of the seam opposite alternate side ``j`` (1-based).

    ``alt`` holds the alternate side lengths.  When ``horo[i]`` is set the
    alternate side ``i`` is a horocyclic arc of that length (a truncated
    cusp) and seams ending there are measured up to the horocycle.
    """
    i, k = _SEAM_ENDS[j]
    ai, ak, aj = alt[i - 1], alt[k - 1], alt[j - 1]
    hi, hk, hj = horo[i - 1], horo[k - 1], horo[j - 1]
    cj = 1.0 if hj else math.cosh(aj)
    if not hi and not hk:
        num = math.cosh(ai) * math.cosh(ak) + cj
        return math.acosh(num / (math.sinh(ai) * math.sinh(ak)))
    if hi and hk:
        return math.log((1.0 + cj) / (2.0 * ai * ak))
    t, a = (ai, ak) if hi else (ak, ai)
    return math.log((math.cosh(a) + cj) / (t * math.sinh(a)))


@dataclass(frozen=True)
class Hexagon:
    """Right-angled hexagon with sides ``a1, b3, a2, b1, a3, b2`` in cyclic order.

    An alternate side flagged in ``horocyclic`` is a horocyclic arc cutting
    off an ideal vertex; all corners remain right angles.
    """

    sides: tuple[float, float, float, float, float, float]
    horocyclic: tuple[bool, bool, bool] = (False, False, False)

    @property
    def alternate(self) -> tuple[float, float, float]:
        a1, _, a2, _, a3, _ = self.sides
        return (a1, a2, a3)

    @property
    def seams(self) -> tuple[float, float, float]:
        """Seam lengths ``(b1, b2, b3)``."""
        _, b3, _, b1, _, b2 = self.sides
        return (b1, b2, b3)

    def relation_residuals(self) -> list[float]:
        """Relative residuals of ``cosh b_i sinh a_j sinh a_k = cosh a_i + cosh a_j cosh a_k``."""
        a, b = self.alternate, self.seams
        out = []
        for i in range(3):
            j, k = (i + 1) % 3, (i + 2) % 3
            lhs = math.cosh(b[i]) * math.sinh(a[j]) * math.sinh(a[k])
            rhs = math.cosh(a[i]) + math.cosh(a[j]) * math.cosh(a[k])
            out.append(abs(lhs - rhs) / rhs)
        return out


def hexagon_from_alternate(
    alt: tuple[float, float, float],
    horo: tuple[bool, bool, bool] = (False, False, False),
) -> Hexagon:
    if any(a <= 0 for a in alt):
        raise ValueError(f"alternate side lengths must be positive, got {alt}")
    b1, b2, b3 = (seam_length(j, alt, horo) for j in (1, 2, 3))
    if min(b1, b2, b3) <= 0:
        raise ValueError(f"degenerate hexagon for alternate sides {alt} (horocycles too long)")
    a1, a2, a3 = alt
    return Hexagon((a1, b3, a2, b1, a3, b2), tuple(horo))


def hexagons_from_pants(l1: float, l2: float, l3: float) -> Hexagon:
    """The right-angled hexagon with alternate sides ``l_i / 2``.

    Cutting a pair of pants with boundary lengths ``l1, l2, l3`` along its
    three seams yields two isometric copies of this hexagon.
    """
    return hexagon_from_alternate((l1 / 2.0, l2 / 2.0, l3 / 2.0))


@dataclass
class Side:
    """One boundary side of a polygon traced in the hyperboloid model."""

    start: np.ndarray
    end: np.ndarray
    tangent: np.ndarray
    length: float
    horocyclic: bool = False
    null: np.ndarray | None = field(default=None, repr=False)

    def points(self, s: np.ndarray) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if self.horocyclic:
            x, t = self.start, self.tangent
            return x + s[:, None] * t + 0.5 * (s * s)[:, None] * self.null
        return geodesic_point(self.start, self.end, self.length, s)


def _mp_left_normal(x, t):
    cx = x[1] * t[2] - x[2] * t[1]
    cy = x[2] * t[0] - x[0] * t[2]
    cz = x[0] * t[1] - x[1] * t[0]
    return [cx, cy, -cz]


def trace_hexagon(hexagon: Hexagon) -> list[Side]:
    """Walk the boundary counter-clockwise, turning left by a right angle at each corner.

    The walk runs in extended precision (seams of thin hexagons are long
    and the frame products are badly conditioned), starts at the origin
    heading along +x, and is re-centred so that the Minkowski barycentre of
    the corners sits at the origin.  Raises if the walk fails to close,
    which certifies the side lengths.
    """
    import mpmath as mp

    horo_flags = (hexagon.horocyclic[0], False, hexagon.horocyclic[1], False,
                  hexagon.horocyclic[2], False)
    with mp.workdps(50):
        x = [mp.mpf(0), mp.mpf(0), mp.mpf(1)]
        t = [mp.mpf(1), mp.mpf(0), mp.mpf(0)]
        frames = []
        for length, horo in zip(hexagon.sides, horo_flags):
            s = mp.mpf(length)
            if horo:
                n = _mp_left_normal(x, t)
                null = [x[i] - n[i] for i in range(3)]
                x1 = [x[i] + s * t[i] + s * s / 2 * null[i] for i in range(3)]
                t1 = [t[i] + s * null[i] for i in range(3)]
            else:
                null = None
                x1 = [mp.cosh(s) * x[i] + mp.sinh(s) * t[i] for i in range(3)]
                t1 = [mp.sinh(s) * x[i] + mp.cosh(s) * t[i] for i in range(3)]
            frames.append((x, t, x1, null))
            x, t = x1, _mp_left_normal(x1, t1)
        gap = mp.sqrt(max((x[0]) ** 2 + x[1] ** 2 - (x[2] - 1) ** 2, 0))
        turn = max(abs(t[0] - 1), abs(t[1]), abs(t[2]))
        if gap > 1e-9 or turn > 1e-9:
            raise RuntimeError(f"hexagon walk does not close (gap {float(gap):.3e})")
        c = [sum(f[0][i] for f in frames) for i in range(3)]
        norm = mp.sqrt(c[2] ** 2 - c[0] ** 2 - c[1] ** 2)
        c = [ci / norm for ci in c]
        r = mp.sqrt(c[0] ** 2 + c[1] ** 2)
        u = [c[0] / r, c[1] / r]
        m = [[mp.mpf(int(i == j)) for j in range(3)] for i in range(3)]
        for i in range(2):
            for j in range(2):
                m[i][j] += u[i] * u[j] * (c[2] - 1)
            m[i][2] = -r * u[i]
            m[2][i] = -r * u[i]
        m[2][2] = c[2]

        def push(v):
            return np.array([float(sum(m[i][j] * v[j] for j in range(3))) for i in range(3)])

        sides = []
        for (x0, t0, x1, null), length, horo in zip(frames, hexagon.sides, horo_flags):
            sides.append(Side(push(x0), push(x1), push(t0), float(length), horo,
                              None if null is None else push(null)))
    return sides
