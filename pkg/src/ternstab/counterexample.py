"""The bounded sawtooth-series counterexample at the critical exponent.

``f(x) = sum_n phi(2^n x) / 2^n`` with ``phi`` a clipped linear sawtooth of
slope ``mu = theta / 6`` is bounded by ``2 mu``, yet its Cauchy-Jensen defect
is controlled linearly: ``|3 f((x+y+z)/3) - 2 f((x+y)/2) - f(z)|`` stays
below ``(16/3) theta (|x|+|y|+|z|)``. The rescaled iterates
``3^m f(3^-m x)`` nevertheless grow without bound, so no exact additive map
sits at finite distance from ``f`` -- stabilization genuinely fails when the
control exponent equals one.

Both a truncated-series evaluator and an exact closed form are provided; the
closed form doubles as the oracle for the series and feeds the divergence
profile, which is computed in exponent space so it stays finite up to
``m = 600``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from . import algebra as alg
from .algebra import Element
from .errors import ValidationError
from .mappings import MappingHandle

LOG2_3 = math.log2(3.0)
PROFILE_CAP = 600


@dataclass(frozen=True)
class GajdaFunction:
    """The counterexample function at level ``theta`` (slope ``mu = theta/6``).

    ``truncation`` bounds the series tail by ``mu * 2**(1 - truncation)``;
    the default 64 pushes it below double rounding for desk-scale arguments.
    """

    theta: float
    truncation: int = 64

    def __post_init__(self):
        if not (math.isfinite(self.theta) and self.theta > 0):
            raise ValidationError(f"theta must be positive, got {self.theta}")
        if self.truncation < 1:
            raise ValidationError("truncation must be >= 1")

    @property
    def mu(self) -> float:
        return self.theta / 6.0


def phi(x: float, mu: float) -> float:
    """Clipped sawtooth: ``mu*x`` on (-1, 1), saturating at ``+-mu`` outside."""
    if x >= 1.0:
        return mu
    if x <= -1.0:
        return -mu
    return mu * x


def saturation_index(x: float) -> int:
    """Smallest n >= 0 with ``2**n * |x| >= 1``.

    Extracted from the binary exponent of ``x`` so exact powers of two never
    suffer log rounding: for 0 < |x| < 1 the normalized mantissa m lies in
    [1/2, 1), hence ``2**(1-e) * |x| = 2m`` is the first doubling to reach 1.
    """
    ax = abs(x)
    if ax >= 1.0:
        return 0
    if ax == 0.0:
        raise ValidationError("saturation index undefined at zero")
    _, exponent = math.frexp(ax)
    return 1 - exponent


def eval_series(g: GajdaFunction, x: float) -> tuple[float, float]:
    """Partial sum over ``n < truncation`` and the geometric tail bound.

    Doubling the argument and halving the weight are exact, so each term
    carries a single rounding; ``fsum`` then rounds the whole sum once. The
    tail bound is the pure truncation error; rounding adds at most a few ulp
    of ``2 mu`` on top of it.
    """
    mu = g.mu
    terms = []
    power = 1.0
    arg = float(x)
    for _ in range(g.truncation):
        terms.append(phi(arg, mu) / power)
        power *= 2.0
        arg *= 2.0
    return math.fsum(terms), mu * 2.0 ** (1 - g.truncation)


def eval_closed_form(g: GajdaFunction, x: float) -> float:
    """Exact series sum: n0 linear terms of ``mu*x`` plus the saturated tail.

    For x != 0 with saturation index n0, terms below n0 contribute ``mu*x``
    each and the rest sum to ``sign(x) * mu * 2**(1-n0)``.
    """
    x = float(x)
    if x == 0.0:
        return 0.0
    n0 = saturation_index(x)
    sign = 1.0 if x > 0 else -1.0
    return g.mu * x * n0 + sign * g.mu * 2.0 ** (1 - n0)


class EnvelopeLevel(Enum):
    """The chain of defect envelopes implied by the base Cauchy estimate."""

    BASE = "base"  # |f(x+y)-f(x)-f(y)|            <= theta(|x|+|y|)
    TRIPLE = "triple"  # |f(x+y+z)-f(x)-f(y)-f(z)| <= (5/3) theta (|x|+|y|+|z|)
    JENSEN2 = "jensen2"  # |2f((x+y)/2)-f(x)-f(y)|  <= 2 theta (|x|+|y|)
    JENSEN3 = "jensen3"  # |3f((x+y+z)/3)-f-f-f|    <= (10/3) theta (|x|+|y|+|z|)
    FINAL_WEIGHTED = "final_weighted"  # cauchy-jensen <= (2/3) theta (8|x|+8|y|+5|z|)
    FINAL_UNIFORM = "final_uniform"  # cauchy-jensen <= (16/3) theta (|x|+|y|+|z|)


def check_envelope(
    g: GajdaFunction, level: EnvelopeLevel, x: float, y: float, z: float = 0.0
) -> tuple[float, float]:
    """Evaluate (lhs, rhs) of one envelope; ``z`` is ignored for two-point levels.

    Contract: ``lhs <= rhs + 1e-12`` for every real triple.
    """
    f = lambda t: eval_closed_form(g, t)
    theta = g.theta
    if level is EnvelopeLevel.BASE:
        return abs(f(x + y) - f(x) - f(y)), theta * (abs(x) + abs(y))
    if level is EnvelopeLevel.TRIPLE:
        lhs = abs(f(x + y + z) - f(x) - f(y) - f(z))
        return lhs, (5.0 / 3.0) * theta * (abs(x) + abs(y) + abs(z))
    if level is EnvelopeLevel.JENSEN2:
        return abs(2.0 * f((x + y) / 2.0) - f(x) - f(y)), 2.0 * theta * (abs(x) + abs(y))
    if level is EnvelopeLevel.JENSEN3:
        lhs = abs(3.0 * f((x + y + z) / 3.0) - f(x) - f(y) - f(z))
        return lhs, (10.0 / 3.0) * theta * (abs(x) + abs(y) + abs(z))
    lhs = abs(3.0 * f((x + y + z) / 3.0) - 2.0 * f((x + y) / 2.0) - f(z))
    if level is EnvelopeLevel.FINAL_WEIGHTED:
        return lhs, (2.0 / 3.0) * theta * (8.0 * abs(x) + 8.0 * abs(y) + 5.0 * abs(z))
    return lhs, (16.0 / 3.0) * theta * (abs(x) + abs(y) + abs(z))


@dataclass(frozen=True)
class ProfilePoint:
    m: int
    s_m: float
    normalized: float  # s_m / (mu * m); converges to log2(3)


def divergence_profile(g: GajdaFunction, m_max: int) -> list[ProfilePoint]:
    """The rescaled iterates ``s_m = 3^m f(3^-m)`` for m = 1..m_max.

    Computed in exponent space: with ``n0 = ceil(m log2 3)`` (taken from the
    bit length of ``3**m``, exactly), ``s_m = mu * (n0 + 2**(m log2 3 + 1 - n0))``,
    whose exponent lies in (0, 1], so no power under- or overflows even at
    m = 600. The normalized ratio tends to ``log2 3`` from above.
    """
    if not 1 <= m_max <= PROFILE_CAP:
        raise ValidationError(f"m_max must lie in [1, {PROFILE_CAP}], got {m_max}")
    mu = g.mu
    out: list[ProfilePoint] = []
    power3 = 1
    for m in range(1, m_max + 1):
        power3 *= 3
        n0 = power3.bit_length()  # 3**m is never a power of two
        s_m = mu * (n0 + 2.0 ** (m * LOG2_3 + 1.0 - n0))
        out.append(ProfilePoint(m, s_m, s_m / (mu * m)))
    return out


def as_mapping(g: GajdaFunction) -> MappingHandle:
    """Lift to a 1-dimensional diagonal-algebra mapping acting on real parts."""
    domain = alg.diagonal_algebra(1)

    def eval_(x: Element) -> Element:
        return alg.element(domain, [eval_closed_form(g, x.data[0].real)])

    return MappingHandle(domain, domain, eval_, f"gajda(theta={g.theta})")
