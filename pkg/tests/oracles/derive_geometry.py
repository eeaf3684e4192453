"""Independent re-derivation of the closed-form example values.

Run directly to print the frozen values used in ``tests/test_geometry.py``.
Nothing here imports the package: collar widths come from the odd-power
series of ``2 artanh(e^-x)``, hexagons from geodesics drawn in the upper
half-plane and a root solve on measured distances, everything else from
50-digit mpmath evaluation of the defining expressions.
"""

from __future__ import annotations

import cmath
import math

import mpmath as mp
from scipy import optimize

mp.mp.dps = 50


def collar_series(ell, terms=20000):
    x = mp.mpf(ell) / 2
    q = mp.e ** (-x)
    return 2 * mp.nsum(lambda n: q ** (2 * n + 1) / (2 * n + 1), [0, mp.inf])


def uhp_dist(z, w):
    return math.acosh(1 + abs(z - w) ** 2 / (2 * z.imag * w.imag))


def perpendicular_geodesic_through(point_on_circle_angle, radius):
    """Geodesic meeting the circle |z|=radius orthogonally at angle theta.

    Returns its Euclidean centre on the real axis and radius.
    """
    p = radius * cmath.exp(1j * point_on_circle_angle)
    # circle orthogonal to |z|=R through p with centre c on the real line:
    # |p - c|^2 + R^2 = c^2  ->  c = (|p|^2 + R^2) / (2 Re p)
    c = (abs(p) ** 2 + radius ** 2) / (2 * p.real)
    return c, abs(p - c)


def point_on_unit_circle_at_distance(d, radius=1.0):
    """Point on |z| = radius at hyperbolic distance d from i*radius (moving right)."""
    # along the geodesic |z| = R, z = R e^{i theta}: distance from theta=pi/2 is arctanh(cos theta)
    theta = math.acos(math.tanh(d))
    return theta


def hexagon_uhp(a1, a2, a3):
    """Solve for the hexagon by drawing it in the upper half-plane.

    Side A1 is the segment [i, i e^{a1}] of the imaginary axis.  The seams
    B3 and B2 lie on |z| = 1 and |z| = e^{a1}.  Unknown seam lengths b3, b2
    place the geodesics carrying A2 and A3; their common perpendicular
    (found by making the distance stationary) gives B1, and we require its
    feet to sit at distances a2, a3 from the seams.
    """
    a1, a2, a3 = mp.mpf(a1), mp.mpf(a2), mp.mpf(a3)
    big = mp.e ** a1

    def carrier(b, radius):
        theta = mp.acos(mp.tanh(b))
        p = radius * mp.expj(theta)
        c = (abs(p) ** 2 + radius ** 2) / (2 * mp.re(p))
        return c, abs(p - c), mp.arg(p - c)

    def at(c, r, phi0, s):
        phi = 2 * mp.atan(mp.tan(phi0 / 2) * mp.e ** s)
        return c + r * mp.expj(phi)

    def coshdist(z, w):
        return 1 + abs(z - w) ** 2 / (2 * mp.im(z) * mp.im(w))

    def feet(b3, b2, guess):
        c2, r2, f2 = carrier(b3, 1)
        c3, r3, f3 = carrier(b2, big)

        def f(u, v):
            return coshdist(at(c2, r2, f2, u), at(c3, r3, f3, v))

        grad = [lambda u, v: mp.diff(lambda x: f(x, v), u),
                lambda u, v: mp.diff(lambda y: f(u, y), v)]
        u, v = mp.findroot(grad, guess)
        return u, v, mp.acosh(f(u, v))

    def coarse(b3, b2):
        c2, r2, f2 = carrier(b3, 1)
        c3, r3, f3 = carrier(b2, big)
        fn = lambda x: float(coshdist(at(c2, r2, f2, x[0]), at(c3, r3, f3, x[1])))
        best = min((optimize.minimize(fn, g, method="Nelder-Mead") for g in
                    ([-1.0, -1.0], [-1.0, 1.0], [1.0, -1.0], [1.0, 1.0])), key=lambda r: r.fun)
        return best.x

    # coarse outer solve in floats, then polish everything at 50 digits
    def residual_float(v):
        u, w = coarse(mp.mpf(v[0]), mp.mpf(v[1]))
        return [abs(u) - float(a2), abs(w) - float(a3)]

    b3, b2 = optimize.least_squares(residual_float, [4.0, 4.0], bounds=([0.5, 0.5], [30, 30])).x
    guess = list(coarse(mp.mpf(b3), mp.mpf(b2)))
    state = {"guess": guess}

    def residual(b3, b2):
        u, v, _ = feet(b3, b2, state["guess"])
        state["guess"] = [u, v]
        return [abs(u) - a2, abs(v) - a3]

    b3, b2 = mp.findroot(residual, (mp.mpf(b3), mp.mpf(b2)))
    _, _, b1 = feet(b3, b2, state["guess"])
    return float(b1), float(b2), float(b3)


def main() -> None:
    print("collar_width(2)", mp.nstr(collar_series(2), 17))
    print("collar_width(0.1)", mp.nstr(collar_series(0.1), 17))
    print("collar_width(1)", mp.nstr(collar_series(1), 17))
    band = mp.sinh(1) * mp.mpf("0.15")
    print("buser(0.15)", mp.nstr(band / (2 * mp.pi - band), 17))
    band = mp.sinh(1) * 3
    print("buser(3)", mp.nstr(band / (2 * mp.pi - band), 17))
    for ell, eps in ((1, mp.mpf("0.25")), (mp.mpf("0.5"), mp.mpf("0.05"))):
        ell = mp.mpf(ell)
        raw = ell * mp.e ** ell / (2 * mp.sinh(ell / 2) * eps * 4 * mp.pi)
        print(f"randol_raw({ell},{eps})", mp.nstr(raw, 17))
    for g, eps in ((2, mp.mpf("0.25")), (3, mp.mpf("0.1"))):
        print(f"genus_raw({g},{eps})", mp.nstr(2 * mp.log(4 * g - 2) / eps, 17))
    print("nonsep(2)", mp.nstr(2 * mp.acosh(3), 17))
    print("nonsep_log(2)", mp.nstr(2 * mp.log(6), 17))
    print("lambda_lower(sys=1,chi=-2)", mp.nstr(mp.mpf(1) / 4 + 1 / (16 * mp.pi ** 2), 17))
    w = 2 * mp.atanh(mp.e ** (-1))  # arsinh(1/sinh(1)) via the series identity
    print("w(1)", mp.nstr(w, 17))
    print("lambda_upper(sys=1)", mp.nstr(mp.mpf(1) / 4 + 4 * mp.pi ** 2 / w ** 2, 17))
    print("delta(1,4pi)", mp.nstr(1 / (16 * mp.pi ** 2), 17))
    rho = collar_series(1)
    print("randol_quotient(ell=1,k=3)", mp.nstr(2 * mp.sinh(rho) / (rho ** 2 * 3 * 4 * mp.pi), 17))
    print("hexagon(1,1,1)", hexagon_uhp(0.5, 0.5, 0.5))
    print("hexagon(1,1,2)", hexagon_uhp(0.5, 0.5, 1.0))


if __name__ == "__main__":
    main()
