"""Trigonometry of the constant-curvature model surface M^2_kappa.

Everything is intrinsic: a triangle is three side lengths, an angle is a
float in radians.  Curvature is an arbitrary real; lengths are rescaled by
sqrt(|kappa|) so that only the unit sphere, the plane and the unit
hyperbolic plane need formulas.  Half-angle (tangent) forms are used
throughout because they stay accurate for needle triangles, which surgery
produces routinely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateTriangle, SizeBound

EPS_GEOM = 1e-9


@dataclass(frozen=True)
class Kappa:
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"curvature must be finite, got {self.value}")

    @property
    def sign(self) -> int:
        return (self.value > 0) - (self.value < 0)

    @property
    def diameter(self) -> float:
        """pi / sqrt(kappa) for kappa > 0, +inf otherwise."""
        if self.value > 0:
            return math.pi / math.sqrt(self.value)
        return math.inf

    @property
    def scale(self) -> float:
        return math.sqrt(abs(self.value))


def as_kappa(kappa) -> Kappa:
    return kappa if isinstance(kappa, Kappa) else Kappa(float(kappa))


def _sn(k: int, x: float) -> float:
    if k > 0:
        return math.sin(x)
    if k < 0:
        return math.sinh(x)
    return x


def check_sides(kappa, a: float, b: float, c: float, tol: float = EPS_GEOM) -> None:
    """Raise if (a, b, c) is not a valid triangle in M^2_kappa."""
    kappa = as_kappa(kappa)
    if min(a, b, c) <= 0 or not all(map(math.isfinite, (a, b, c))):
        raise DegenerateTriangle(f"side lengths must be positive: {(a, b, c)}")
    slack = tol * max(1.0, a + b + c)
    if a > b + c + slack or b > a + c + slack or c > a + b + slack:
        raise DegenerateTriangle(f"triangle inequality violated: {(a, b, c)}")
    if kappa.value > 0 and a + b + c >= 2 * kappa.diameter:
        raise SizeBound(f"perimeter {a + b + c} >= {2 * kappa.diameter}")


def _half_perimeter_terms(a, b, c, tol):
    s = 0.5 * (a + b + c)
    terms = [s - a, s - b, s - c]
    slack = tol * max(1.0, a + b + c)
    for i, t in enumerate(terms):
        if t < 0:
            if t < -slack:
                raise DegenerateTriangle(f"triangle inequality violated: {(a, b, c)}")
            terms[i] = 0.0
    return s, terms


def angle_from_sides(kappa, sides, opposite: int = 0, tol: float = EPS_GEOM) -> float:
    """Angle (radians) of the triangle ``sides`` at the corner facing ``sides[opposite]``.

    ``opposite`` selects the side by index (0, 1 or 2).  Near-degenerate
    triangles are clamped to 0 or pi instead of raising.
    """
    kappa = as_kappa(kappa)
    a = sides[opposite]
    b = sides[(opposite + 1) % 3]
    c = sides[(opposite + 2) % 3]
    check_sides(kappa, a, b, c, tol)
    k = kappa.sign
    sc = kappa.scale if k else 1.0
    s, (sa, sb, scc) = _half_perimeter_terms(a * sc, b * sc, c * sc, tol)
    num = _sn(k, sb) * _sn(k, scc)
    den = _sn(k, s) * _sn(k, sa)
    return 2.0 * math.atan2(math.sqrt(max(num, 0.0)), math.sqrt(max(den, 0.0)))


def triangle_angles(kappa, sides, tol: float = EPS_GEOM) -> tuple[float, float, float]:
    """Angles opposite sides 0, 1, 2."""
    return tuple(angle_from_sides(kappa, sides, i, tol) for i in range(3))


def is_needle(kappa, sides, tol: float = EPS_GEOM) -> bool:
    """True when the triangle is within ``tol`` of collinear."""
    a, b, c = sides
    check_sides(kappa, a, b, c, tol)
    slack = tol * max(1.0, a + b + c)
    s = 0.5 * (a + b + c)
    return min(s - a, s - b, s - c) <= slack


def side_from_sas(kappa, b: float, c: float, alpha: float) -> float:
    """Third side of the triangle with sides b, c enclosing the angle alpha."""
    kappa = as_kappa(kappa)
    if b <= 0 or c <= 0:
        raise DegenerateTriangle(f"sides must be positive: {(b, c)}")
    if not 0.0 <= alpha <= math.pi:
        raise DegenerateTriangle(f"angle out of range: {alpha}")
    k = kappa.sign
    if k == 0:
        a = math.sqrt((b - c) ** 2 + 4.0 * b * c * math.sin(alpha / 2) ** 2)
    else:
        sc = kappa.scale
        bs, cs = b * sc, c * sc
        if k > 0:
            if bs + cs >= math.pi:
                raise SizeBound(f"sides {(b, c)} exceed the curvature bound")
            h = math.sin((bs - cs) / 2) ** 2 + math.sin(bs) * math.sin(cs) * math.sin(alpha / 2) ** 2
            a = 2.0 * math.asin(math.sqrt(min(h, 1.0))) / sc
        else:
            h = math.sinh((bs - cs) / 2) ** 2 + math.sinh(bs) * math.sinh(cs) * math.sin(alpha / 2) ** 2
            a = 2.0 * math.asinh(math.sqrt(h)) / sc
    if k > 0 and a + b + c >= 2 * kappa.diameter:
        raise SizeBound(f"perimeter {a + b + c} exceeds the curvature bound")
    return a


def triangle_area(kappa, sides, tol: float = EPS_GEOM) -> float:
    """Area of the model triangle: Heron for kappa = 0, angle excess / kappa otherwise."""
    kappa = as_kappa(kappa)
    a, b, c = sides
    check_sides(kappa, a, b, c, tol)
    if kappa.value == 0:
        # Kahan's ordering of Heron's formula.
        x, y, z = sorted((a, b, c), reverse=True)
        p = (x + (y + z)) * (z - (x - y)) * (z + (x - y)) * (x + (y - z))
        return 0.25 * math.sqrt(max(p, 0.0))
    excess = sum(triangle_angles(kappa, sides, tol)) - math.pi
    return max(excess / kappa.value, 0.0)


def comparison_angle(kappa, d_xy: float, d_xz: float, d_yz: float, tol: float = EPS_GEOM) -> float:
    """Model angle at x of the triangle with the given pairwise distances."""
    return angle_from_sides(kappa, (d_yz, d_xy, d_xz), 0, tol)
