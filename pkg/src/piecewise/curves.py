"""Reference curves for profiles and return probabilities, and finite-range fits."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from .gluing import bubble_volume_formula, bubble_volume_lower, bubble_volume_upper
from .profile_engine import ProfileTable
from .walk_engine import rho_alpha


class DomainError(ValueError):
    pass


class InsufficientPoints(ValueError):
    pass


@dataclass
class ReferenceCurve:
    name: str
    fn: Callable[[float], float]
    direction: str  # "increasing" or "decreasing"
    domain: Callable[[float], bool]
    params: dict = field(default_factory=dict)

    def __call__(self, x: float) -> float:
        if not self.domain(x):
            raise DomainError(f"{x} is outside the domain of {self.name}")
        return self.fn(x)


def composite_argument(v: float) -> float:
    """``log(1+v) / log(1 + log(1+v))``."""
    if v <= 0:
        raise DomainError("v must be positive")
    a = math.log1p(v)
    return a / math.log1p(a)


def bubble_return(n: float, kappa: float) -> float:
    """``exp(-n^((k+1)/(3k+1)) (log n)^(2k/(3k+1)))``."""
    if n <= 1:
        raise DomainError("n must exceed 1")
    e1 = (kappa + 1) / (3 * kappa + 1)
    e2 = 2 * kappa / (3 * kappa + 1)
    return math.exp(-(n ** e1) * math.log(n) ** e2)


def curve(name: str, **params) -> ReferenceCurve:
    """Named curves: composite, inverse, inverse_square, rho, bubble_return, bubble_volume, bubble_upper, bubble_lower."""
    pos = lambda x: x > 0  # noqa: E731
    if name == "composite":
        return ReferenceCurve(name, composite_argument, "increasing", pos)
    if name == "inverse":
        return ReferenceCurve(name, lambda v: 1.0 / v, "decreasing", pos)
    if name == "inverse_square":
        return ReferenceCurve(name, lambda v: 1.0 / (v * v), "decreasing", pos)
    if name == "rho":
        alpha = params.get("alpha", 2)
        return ReferenceCurve(name, lambda s: rho_alpha(alpha, s), "decreasing", lambda s: 0 < s <= 1,
                              {"alpha": alpha})
    if name == "bubble_return":
        kappa = float(params.get("kappa", 1.0))
        return ReferenceCurve(name, lambda n: bubble_return(n, kappa), "decreasing", lambda n: n > 1.5,
                              {"kappa": kappa})
    if name in ("bubble_volume", "bubble_upper", "bubble_lower"):
        a = tuple(params["a"])
        f = {"bubble_volume": bubble_volume_formula, "bubble_upper": bubble_volume_upper,
             "bubble_lower": bubble_volume_lower}[name]
        direction = "increasing"

        def ok(t, a=a, f=f):
            if t < 0:
                return False
            try:
                f(a, int(t))
            except ValueError:
                return False
            return True

        return ReferenceCurve(name, lambda t: float(f(a, int(t))), direction, ok, {"a": list(a)})
    if name == "profile_of_composite":
        inner = params["inner"]
        return ReferenceCurve(name, lambda v: inner(composite_argument(v)), "decreasing", pos)
    raise ValueError(f"unknown curve {name!r}")


@dataclass
class FitReport:
    curve: str
    points: int
    c1: float
    c2: float
    c3: float
    c4: float
    log_scale: float  # least-squares log(value / curve)
    flags: list

    def to_json(self) -> dict:
        return {"curve": self.curve, "points": self.points, "c1": self.c1, "c2": self.c2, "c3": self.c3,
                "c4": self.c4, "log_scale": self.log_scale, "flags": list(self.flags)}


def compare_profile_to_curve(table: ProfileTable, c: ReferenceCurve) -> FitReport:
    """Sandwich constants ``c1 f(c2 v) <= Lambda(v) <= c3 f(c4 v)`` on the exact range.

    The argument constants are fixed to 1 and the multiplicative ones are the
    extreme ratios. This is a description of the computed range, not a test.
    """
    flags = []
    pts = [pt for pt in table.exact_points() if c.domain(pt.v)]
    if any(pt.value <= 1e-12 for pt in pts):
        flags.append("finite group, profile hits 0 wall")
        pts = [pt for pt in pts if pt.value > 1e-12]
    if len(pts) < 3:
        raise InsufficientPoints(f"need at least 3 exact points, have {len(pts)}")
    ratios = [pt.value / c(pt.v) for pt in pts]
    logs = [math.log(r) for r in ratios]
    return FitReport(c.name, len(pts), min(ratios), 1.0, max(ratios), 1.0, math.fsum(logs) / len(logs), flags)
