"""Closed-form quantities: areas, collars, cover orders and eigenvalue bounds."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from .surface import FNSurface, UnsupportedTopology

SINH1 = math.sinh(1.0)


def euler_characteristic(genus: int, punctures: int, holes: int, mobius: int = 0) -> int:
    if genus < 0 or punctures < 0 or holes < 0 or mobius not in (0, 1, 2):
        raise ValueError("need genus, punctures, holes >= 0 and mobius in {0, 1, 2}")
    if mobius > 0:
        raise UnsupportedTopology("embedded Moebius bands are not supported")
    return 2 - 2 * genus - punctures - holes - mobius


def gauss_bonnet_area(surface: FNSurface) -> float:
    """Area of the hyperbolic surface (funnels excluded): ``-2 pi chi``."""
    return -2.0 * math.pi * surface.euler_characteristic


def collar_width(ell: float) -> float:
    """Half-width ``arsinh(1 / sinh(ell / 2))`` of the embedded collar about a geodesic.

    Evaluated as ``log((1 + e^-x) / (1 - e^-x))`` with ``x = ell / 2`` so
    that tiny lengths keep full relative accuracy.
    """
    if not ell > 0:
        raise ValueError(f"curve length must be positive, got {ell}")
    x = 0.5 * ell
    return math.log1p(math.exp(-x)) - math.log(-math.expm1(-x))


def buser_rayleigh_bound(sum_lengths: float) -> float:
    """Upper bound ``sinh(1) L / (2 pi - sinh(1) L)`` for the quotient of a pants test function."""
    band = SINH1 * sum_lengths
    if sum_lengths < 0 or band >= 2.0 * math.pi:
        raise ValueError(f"bound undefined for total boundary length {sum_lengths}")
    return band / (2.0 * math.pi - band)


def randol_cover_raw(ell: float, eps: float, area: float) -> float:
    """``ell e^ell / (2 sinh(ell/2) eps area)``."""
    if min(ell, eps, area) <= 0:
        raise ValueError("ell, eps and area must be positive")
    return ell * math.exp(ell) / (2.0 * math.sinh(0.5 * ell) * eps * area)


def randol_ksuf_bound(ell: float, eps: float, area: float) -> float:
    """Sharper requirement ``2 ell sinh(rho) / (rho^2 eps area)`` with ``rho = collar_width(ell)``."""
    if min(ell, eps, area) <= 0:
        raise ValueError("ell, eps and area must be positive")
    rho = collar_width(ell)
    return 2.0 * ell * math.sinh(rho) / (rho * rho * eps * area)


def _strict_ceil(x: float) -> int:
    k = max(1, math.ceil(x))
    return k + 1 if k == x else k


def randol_cover_order(ell: float, eps: float, area: float) -> int:
    """Least ``k >= 1`` strictly above the cover-order bound; the cover has order ``(k + 2) n``."""
    return _strict_ceil(randol_cover_raw(ell, eps, area))


def randol_genus_order(genus: int, eps: float) -> int:
    """Least ``k >= 2 ln(4 genus - 2) / eps`` (and ``k >= 1``)."""
    if genus < 2:
        raise ValueError("genus must be at least 2")
    if not eps > 0:
        raise ValueError("eps must be positive")
    return max(1, math.ceil(2.0 * math.log(4 * genus - 2) / eps))


def nonsep_length_bound(genus: int, log_form: bool = False) -> float:
    """Upper bound for the shortest non-separating geodesic on a closed genus-``genus`` surface.

    Sharp form ``2 arcosh(2g - 1)``; ``log_form`` gives ``2 ln(4g - 2)``.
    """
    if genus < 2:
        raise ValueError("genus must be at least 2")
    if log_form:
        return 2.0 * math.log(4 * genus - 2)
    return 2.0 * math.acosh(2 * genus - 1)


def systole_width(sys: float) -> float:
    """``arsinh(1 / sinh(sys))``, the collar half-width about a systolic geodesic of length ``2 sys``."""
    return collar_width(2.0 * sys)


def analytic_systole_interval(
    sys: float, area: float | None = None, chi: int | None = None, kappa: float = -1.0
) -> tuple[float, float]:
    """Lower and upper bound for the analytic systole.

    Lower: ``-kappa/4 + sys^2 / area^2`` for curvature ``K <= kappa <= 0``.
    Upper: ``1/4 + 4 pi^2 / w^2`` with ``w = arsinh(1/sinh(sys))``; valid only
    for ``K >= -1``, which the caller asserts.  With ``kappa = -1`` and no
    area, the hyperbolic area ``-2 pi chi`` is used.
    """
    if not sys > 0:
        raise ValueError("systole must be positive")
    if kappa > 0:
        raise ValueError("kappa must be <= 0")
    if chi is not None and chi >= 0:
        raise ValueError("Euler characteristic must be negative")
    if area is None:
        if chi is None or kappa != -1.0:
            raise ValueError("area is required unless the metric is hyperbolic with known chi")
        area = -2.0 * math.pi * chi
    if not area > 0:
        raise ValueError("area must be positive")
    lower = -kappa / 4.0 + sys * sys / (area * area)
    w = systole_width(sys)
    upper = 0.25 + 4.0 * math.pi ** 2 / (w * w)
    return lower, upper


def mondal_delta(sys: float, area: float) -> float:
    return min(math.pi / area, sys * sys / (area * area))


def cheeger_lower_bound(h: float) -> float:
    if h < 0:
        raise ValueError("Cheeger constant is nonnegative")
    return h * h / 4.0


def small_count_bound(surface: FNSurface) -> int:
    chi = surface.euler_characteristic
    if chi >= 0:
        raise ValueError("needs negative Euler characteristic")
    return -chi


def sys_upper_bound(surface: FNSurface) -> float:
    """Shortest pants curve or free boundary length: an upper bound for the systole.

    Returns ``inf`` (with a warning) when the surface has no closed curves
    in its decomposition, e.g. the thrice-punctured sphere.
    """
    lengths = list(surface.curve_lengths())
    lengths += [surface.length(s) for s in surface.free_boundaries]
    if not lengths:
        warnings.warn("no closed pants curves: systole upper bound is infinite", stacklevel=2)
        return math.inf
    return min(lengths)


@dataclass
class Verdict:
    name: str
    passed: bool
    value: float = math.nan
    threshold: float = math.nan
    detail: str = ""

    @property
    def margin(self) -> float:
        return self.threshold - self.value


@dataclass
class BoundReport:
    area: float
    euler_char: int
    sys_upper: float
    collar_widths: dict[int, float]
    lambda0_universal: float
    lambda_ess_floor: float
    lambda_interval: tuple[float, float]
    small_count_bound: int
    mondal_delta: float
    lower_bound_certified: bool = False
    verdicts: list[Verdict] = field(default_factory=list)

    def lines(self) -> list[str]:
        lo, hi = self.lambda_interval
        out = [
            f"area                 {self.area:.10g}",
            f"euler_characteristic {self.euler_char}",
            f"sys_upper            {self.sys_upper:.10g}",
        ]
        for idx, rho in sorted(self.collar_widths.items()):
            out.append(f"collar_width[{idx}]      {rho:.10g}")
        out += [
            f"lambda0_universal    {self.lambda0_universal:.10g}",
            f"lambda_ess_floor     {self.lambda_ess_floor:.10g}",
            f"lambda_lower         {lo:.10g}" + ("" if self.lower_bound_certified else "  (uses sys upper bound)"),
            f"lambda_upper         {hi:.10g}",
            f"small_count_bound    {self.small_count_bound}",
            f"mondal_delta         {self.mondal_delta:.10g}",
        ]
        for v in self.verdicts:
            out.append(f"{v.name:<20} {'PASS' if v.passed else 'FAIL'}  {v.detail}")
        return out


def bound_report(surface: FNSurface, sys: float | None = None) -> BoundReport:
    """Collect every closed-form quantity for a hyperbolic surface.

    ``sys`` overrides the curve-enumeration systole bound when the caller
    knows the systole; only then is the lower end of the interval certified.
    """
    area = gauss_bonnet_area(surface)
    chi = surface.euler_characteristic
    certified = sys is not None
    if sys is None:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            sys = sys_upper_bound(surface)
    collars = {i: collar_width(l) for i, l in enumerate(surface.curve_lengths())}
    if math.isfinite(sys):
        interval = analytic_systole_interval(sys, area=area, chi=chi, kappa=-1.0)
        delta = mondal_delta(sys, area)
    else:
        interval = (0.25, math.inf)
        delta = math.pi / area
    report = BoundReport(
        area=area,
        euler_char=chi,
        sys_upper=sys,
        collar_widths=collars,
        lambda0_universal=0.25,
        lambda_ess_floor=0.25 if surface.cusps else math.inf,
        lambda_interval=interval,
        small_count_bound=small_count_bound(surface),
        mondal_delta=delta,
        lower_bound_certified=certified,
    )
    report.verdicts.append(
        Verdict("interval_ordered", interval[0] <= interval[1], interval[0], interval[1])
    )
    report.verdicts.append(
        Verdict("small_count_positive", report.small_count_bound >= 1, report.small_count_bound, 1)
    )
    return report
