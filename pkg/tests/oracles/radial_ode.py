"""Dirichlet ground state of a hyperbolic disk, two independent ways.

Shooting: integrate ``phi'' + coth(r) phi' + lam phi = 0`` from the
regular series ``phi = 1 - lam r^2 / 4`` and root-find ``phi(R) = 0``.
Special functions: the radial solution is the conical Legendre function
``P_{-1/2 + i nu}(cosh r)`` with ``lam = 1/4 + nu^2``; its first zero in
``nu`` at ``cosh R`` gives the same eigenvalue.

Run directly to print the frozen values used by the tests.
"""

from __future__ import annotations

import math

import mpmath as mp
from scipy.integrate import solve_ivp
from scipy.optimize import brentq


def _phi_at(lam: float, radius: float) -> float:
    r0 = 1e-4
    y0 = [1 - lam * r0 ** 2 / 4, -lam * r0 / 2]

    def rhs(r, y):
        return [y[1], -y[1] / math.tanh(r) - lam * y[0]]

    sol = solve_ivp(rhs, (r0, radius), y0, rtol=1e-12, atol=1e-14, method="DOP853")
    return float(sol.y[0, -1])


def shooting_eigenvalue(radius: float) -> float:
    """Smallest ``lam`` with ``phi(radius) = 0``."""
    lo = 0.25 + 1e-9
    # the first eigenvalue is at most that of a Euclidean disk with the same radius scaled by sinh
    hi = 0.25 + (2.404825557695773 / radius) ** 2 * 4 + 50
    grid = [lo + (hi - lo) * k / 400 for k in range(401)]
    vals = [_phi_at(x, radius) for x in grid]
    for a, b, fa, fb in zip(grid, grid[1:], vals, vals[1:]):
        if fa * fb < 0:
            return brentq(lambda x: _phi_at(x, radius), a, b, xtol=1e-14, rtol=1e-13)
    raise RuntimeError("no sign change found")


def legendre_eigenvalue(radius: float, guess: float) -> float:
    mp.mp.dps = 30
    x = mp.cosh(radius)
    nu0 = mp.sqrt(guess - mp.mpf(1) / 4)
    nu = mp.findroot(lambda nu: mp.re(mp.legenp(-mp.mpf(1) / 2 + 1j * nu, 0, x, type=3)), nu0)
    return float(mp.mpf(1) / 4 + nu ** 2)


def main() -> None:
    for radius in (1, 2, 3, 4, 5, 6):
        lam = shooting_eigenvalue(radius)
        print(radius, repr(lam), repr(legendre_eigenvalue(radius, lam)))


if __name__ == "__main__":
    main()
