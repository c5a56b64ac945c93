"""Recovery of exact homomorphisms/derivations from approximate ones.

The direct method: rescaled iterates ``3^n f(x / 3^n)`` (contracting
arguments) or ``3^-n f(3^n x)`` (expanding arguments) converge geometrically
whenever the Cauchy-Jensen defect of ``f`` is dominated by a power control
with exponent in the admissible range. The closed-form tail of that geometric
chain yields an a-priori step count for any target tolerance, and the limit
is the unique exact solution within the closed-form proximity bound.

Four regimes are supported: sum or product control, each with a contracting
or expanding direction. A stall guard aborts iterations whose empirical
increments stop decreasing, which is what happens outside the admissible
exponent ranges (most prominently at the critical exponent r = 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import algebra as alg
from . import mappings as mp
from .algebra import AlgebraDescriptor, Element
from .errors import (
    DivergenceError,
    NonUnitalError,
    RegimeError,
    ToleranceUnreachableError,
    ValidationError,
)
from .mappings import ControlForm, MappingHandle
from .rand import complex_gaussian, substream

STEP_CAP = 200
#: increments must drop below 0.95x the best increment seen, else they count
#: as stalled; five consecutive stalls above the tolerance floor abort the run
STALL_FACTOR = 0.95
STALL_LIMIT = 5


class Direction(Enum):
    CONTRACT = "contract"  # H(x) = lim 3^n f(x / 3^n)
    EXPAND = "expand"  # H(x) = lim 3^-n f(3^n x)


@dataclass(frozen=True)
class Regime:
    """Control form, iteration direction, exponent and control level.

    The iteration contracts when ``gamma > 0``; the full homomorphism /
    derivation conclusion additionally needs the exponent inside the theorem
    range (``conclusion_valid``). For sum control with contracting direction
    those ranges differ: the iteration converges for every r > 1 but the
    conclusion needs r > 3, and exponents in (1, 3] (or any other
    out-of-range choice) are admitted only behind ``allow_subcritical`` for
    pure stabilization experiments.
    """

    form: ControlForm
    direction: Direction
    r: float
    theta: float
    allow_subcritical: bool = False

    def __post_init__(self):
        if not math.isfinite(self.r):
            raise RegimeError(f"exponent must be finite, got {self.r}")
        if not (math.isfinite(self.theta) and self.theta >= 0):
            raise RegimeError(f"theta must be finite and >= 0, got {self.theta}")
        if not self.conclusion_valid and not self.allow_subcritical:
            raise RegimeError(
                f"r={self.r} outside the admissible range for "
                f"{self.form.value}+{self.direction.value}; "
                "pass allow_subcritical=True for stabilization-only experiments"
            )

    @property
    def gamma(self) -> float:
        """Per-step contraction exponent: increments decay like ``3**-gamma``."""
        if self.form is ControlForm.SUM:
            return self.r - 1.0 if self.direction is Direction.CONTRACT else 1.0 - self.r
        return 3.0 * self.r - 1.0 if self.direction is Direction.CONTRACT else 1.0 - 3.0 * self.r

    @property
    def iteration_convergent(self) -> bool:
        return self.gamma > 0.0

    @property
    def conclusion_valid(self) -> bool:
        """Whether the exponent lies in the theorem range for this regime."""
        if self.form is ControlForm.SUM:
            return self.r > 3.0 if self.direction is Direction.CONTRACT else self.r < 1.0
        return self.r > 1.0 / 3.0 if self.direction is Direction.CONTRACT else self.r < 1.0 / 3.0

    def describe(self) -> str:
        return f"{self.form.value}+{self.direction.value}(r={self.r}, theta={self.theta})"


def _tail_constant(regime: Regime, s: float) -> float:
    """Closed-form sum of the one-step geometric chain starting at norm ``s``.

    Finite exactly when the iteration contracts (gamma > 0); coincides with
    the theorem proximity bound on the theorem ranges.
    """
    if s < 0:
        raise ValidationError(f"norm argument must be >= 0, got {s}")
    if regime.gamma <= 0.0:
        raise RegimeError(f"no finite tail for {regime.describe()}: gamma <= 0")
    r, theta = regime.r, regime.theta
    if regime.form is ControlForm.SUM:
        num, den = theta * (3.0**r + 2.0), abs(3.0**r - 3.0)
        return num / den * s**r
    num, den = 3.0**r * theta, abs(27.0**r - 3.0)
    return num / den * s ** (3.0 * r)


def bound(regime: Regime, s: float) -> float:
    """Proximity bound for ``|f(x) - H(x)|`` at ``norm(x) = s``.

    sum+contract:    theta (3^r+2)/(3^r-3) s^r        (r > 3)
    sum+expand:      theta (2+3^r)/(3-3^r) s^r        (r < 1)
    product+contract: 3^r theta/(27^r-3) s^(3r)       (r > 1/3)
    product+expand:   3^r theta/(3-27^r) s^(3r)       (r < 1/3)
    """
    if not regime.conclusion_valid:
        raise RegimeError(f"r={regime.r} outside the theorem range for {regime.describe()}")
    return _tail_constant(regime, s)


def one_step_bound(regime: Regime, s: float) -> float:
    """Bound on the single rescaling step ``|3 f(x) - f(3x)|`` at norm ``s``."""
    if s < 0:
        raise ValidationError(f"norm argument must be >= 0, got {s}")
    r, theta = regime.r, regime.theta
    if regime.form is ControlForm.SUM:
        return theta * (2.0 + 3.0**r) * s**r
    return 3.0**r * theta * s ** (3.0 * r)


def steps_needed(regime: Regime, s: float, tol: float) -> int:
    """Smallest n with ``tail_constant * 3**(-n*gamma) <= tol``, capped at 200."""
    if tol <= 0:
        raise ValidationError(f"tolerance must be positive, got {tol}")
    if regime.gamma <= 0.0:
        raise ToleranceUnreachableError(
            f"{regime.describe()} does not contract; no finite step count"
        )
    constant = _tail_constant(regime, s)
    if constant <= tol:
        return 0
    n = max(0, math.ceil(math.log(constant / tol, 3.0) / regime.gamma))
    while constant * 3.0 ** (-n * regime.gamma) > tol:  # log rounding guard
        n += 1
    while n > 0 and constant * 3.0 ** (-(n - 1) * regime.gamma) <= tol:
        n -= 1
    if n > STEP_CAP:
        raise ToleranceUnreachableError(
            f"{regime.describe()}: {n} steps needed for tol={tol:g}, cap is {STEP_CAP}"
        )
    return n


@dataclass(frozen=True)
class StabilizationReport:
    """Trace of one stabilization run at a single point."""

    regime: str
    n_used: int
    input_norm: float
    tol: float
    apriori_bound: float
    increments: tuple[float, ...]

    @property
    def last_increment(self) -> float:
        return self.increments[-1] if self.increments else 0.0


def stabilize(
    f: MappingHandle, regime: Regime, x: Element, tol: float
) -> tuple[Element, StabilizationReport]:
    """Run the rescaled iteration at ``x`` to the planner's step count.

    In convergent regimes the step count comes from :func:`steps_needed`; in
    subcritical regimes (reachable only behind ``allow_subcritical``) the
    iteration runs toward the step cap under the stall guard, which raises
    :class:`DivergenceError` once increments above the tolerance floor stop
    decreasing.
    """
    if tol <= 0:
        raise ValidationError(f"tolerance must be positive, got {tol}")
    s = alg.norm(x)
    if regime.iteration_convergent:
        n = steps_needed(regime, s, tol)
        apriori = _tail_constant(regime, s)
    else:
        n = STEP_CAP
        apriori = math.inf

    contract = regime.direction is Direction.CONTRACT
    arg = x
    scale_factor = 1.0
    current = f(x)
    increments: list[float] = []
    best_inc = math.inf
    stall = 0
    for j in range(1, n + 1):
        if contract:
            arg = alg.element(arg.algebra, arg.data / 3.0)
            scale_factor *= 3.0
        else:
            arg = alg.element(arg.algebra, 3.0 * arg.data)
            scale_factor /= 3.0
        nxt = alg.scale(scale_factor, f(arg))
        inc = alg.distance(nxt, current)
        increments.append(inc)
        if inc > tol and inc > STALL_FACTOR * best_inc:
            stall += 1
            if stall >= STALL_LIMIT:
                raise DivergenceError(
                    j, f"{regime.describe()}: increments stalled at step {j} (last {inc:.3e})"
                )
        else:
            stall = 0
        best_inc = min(best_inc, inc)
        current = nxt
    if not regime.iteration_convergent:
        raise ToleranceUnreachableError(
            f"{regime.describe()}: no convergence within {STEP_CAP} steps"
        )
    report = StabilizationReport(
        regime.describe(), n, s, tol, apriori, tuple(increments)
    )
    return current, report


def stabilized_handle(f: MappingHandle, regime: Regime, tol: float) -> MappingHandle:
    """Wrap the pointwise stabilization of ``f`` as a mapping handle."""

    def eval_(x: Element) -> Element:
        return stabilize(f, regime, x, tol)[0]

    return MappingHandle(f.domain, f.codomain, eval_, f"stabilized({f.label})")


# ---------------------------------------------------------------------------
# Verification reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NearBoundReport:
    """How close ``f`` stays to its recovered exact solution, vs the bound."""

    samples: int
    slack: float
    worst_ratio: float
    max_excess: float
    violations: int

    @property
    def passed(self) -> bool:
        return self.violations == 0


def verify_near(
    f: MappingHandle,
    h: MappingHandle,
    regime: Regime,
    samples: int,
    seed: int,
    tol: float,
    radius: float = mp.DEFAULT_RADIUS,
) -> NearBoundReport:
    """Check ``|f(x) - h(x)| <= bound(regime, |x|) + slack`` on seeded points.

    ``slack = tol + 1e-10`` absorbs the stabilization tolerance of ``h``.
    """
    slack = tol + 1e-10
    worst = 0.0
    excess = 0.0
    violations = 0
    for i in range(samples):
        x = mp.sample_in_ball(f.domain, radius, substream(seed, i))
        lhs = alg.distance(f(x), h(x))
        rhs = bound(regime, alg.norm(x)) + slack
        worst = max(worst, lhs / rhs)
        if lhs > rhs:
            violations += 1
            excess = max(excess, lhs - rhs)
    return NearBoundReport(samples, slack, worst, excess, violations)


@dataclass(frozen=True)
class DefectCheckReport:
    """Maximum defect norm of a candidate exact solution over seeded samples."""

    kind: str
    samples: int
    tol: float
    max_defect: float

    @property
    def passed(self) -> bool:
        return self.max_defect <= self.tol


def _max_defect(kind, defect_fn, h, samples, tol, seed, radius, arity=3):
    worst = 0.0
    for i in range(samples):
        gen = substream(seed, i)
        xs = [mp.sample_in_ball(h.domain, radius, gen) for _ in range(arity)]
        worst = max(worst, alg.norm(defect_fn(h, *xs)))
    return DefectCheckReport(kind, samples, tol, worst)


def verify_homomorphism(
    h: MappingHandle, samples: int, tol: float, seed: int, radius: float = mp.DEFAULT_RADIUS
) -> DefectCheckReport:
    return _max_defect("homomorphism", mp.homomorphism_defect, h, samples, tol, seed, radius)


def verify_derivation(
    h: MappingHandle, samples: int, tol: float, seed: int, radius: float = mp.DEFAULT_RADIUS
) -> DefectCheckReport:
    return _max_defect("derivation", mp.derivation_defect, h, samples, tol, seed, radius)


def verify_additivity(
    h: MappingHandle, samples: int, tol: float, seed: int, radius: float = mp.DEFAULT_RADIUS
) -> DefectCheckReport:
    def additivity_defect(handle, x, y):
        return handle(x + y) - handle(x) - handle(y)

    return _max_defect("additivity", additivity_defect, h, samples, tol, seed, radius, arity=2)


@dataclass(frozen=True)
class UnitLimitReport:
    """Distance of the stabilized unit image from the codomain unit."""

    distance: float
    tol: float
    n_used: int

    @property
    def passed(self) -> bool:
        return self.distance <= 2.0 * self.tol + 1e-10


def verify_unit_limit(f: MappingHandle, regime: Regime, tol: float) -> UnitLimitReport:
    """Stabilize ``f`` at the domain unit and compare with the codomain unit."""
    e = alg.unit(f.domain)
    e_prime = alg.unit(f.codomain)
    if e is None or e_prime is None:
        raise NonUnitalError("unit-limit check requires unital domain and codomain")
    value, report = stabilize(f, regime, e, tol)
    return UnitLimitReport(alg.distance(value, e_prime), tol, report.n_used)


def _numeric_rank(mat: np.ndarray, rtol: float = 1e-10) -> int:
    a = np.array(mat, dtype=np.complex128)
    scale_ = float(np.abs(a).max()) if a.size else 0.0
    if scale_ == 0.0:
        return 0
    rank = 0
    for _ in range(min(a.shape)):
        flat = int(np.abs(a).argmax())
        i, j = divmod(flat, a.shape[1])
        pivot = a[i, j]
        if abs(pivot) <= rtol * scale_:
            break
        rank += 1
        a = a - np.outer(a[:, j], a[i, :]) / pivot
    return rank


@dataclass(frozen=True)
class IsomorphismReport:
    """Outcome of the exact-multiplicativity isomorphism mechanism.

    The bijectivity part is a numerical consistency probe (distinct images
    plus full numerical rank of the linearized map), not a proof.
    """

    distinct_images: bool
    linearity_violation: float
    full_rank: bool
    multiplicativity_defect: float
    unit_limit: UnitLimitReport
    pointwise_distance: float
    samples: int
    tol: float

    @property
    def consistent_with_bijective(self) -> bool:
        return self.distinct_images and self.full_rank

    @property
    def passed(self) -> bool:
        return (
            self.consistent_with_bijective
            and self.linearity_violation <= 1e-9
            and self.multiplicativity_defect <= self.tol
            and self.unit_limit.passed
            and self.pointwise_distance <= 2.0 * self.tol + 1e-10
        )


def check_isomorphism(
    f: MappingHandle, regime: Regime, samples: int, tol: float, seed: int
) -> IsomorphismReport:
    """Verify exact multiplicativity, the unit limit, and the pointwise
    collapse ``stabilize(f) == f`` that together certify an isomorphism."""
    domain = f.domain
    probes = [mp.sample_in_ball(domain, mp.DEFAULT_RADIUS, substream(seed, 900 + i)) for i in range(8)]
    images = [f(p) for p in probes]
    biggest = max(alg.norm(im) for im in images)
    distinct = all(
        alg.distance(images[i], images[j]) > 1e-12 * (1.0 + biggest)
        for i in range(len(images))
        for j in range(i + 1, len(images))
    )

    lin = 0.0
    for i in range(4):
        gen = substream(seed, 800 + i)
        x = mp.sample_in_ball(domain, mp.DEFAULT_RADIUS, gen)
        y = mp.sample_in_ball(domain, mp.DEFAULT_RADIUS, gen)
        lam = complex(complex_gaussian(gen, (1,))[0])
        lin = max(lin, alg.mixed_violation(f(x + y), f(x) + f(y)))
        lin = max(lin, alg.mixed_violation(f(alg.scale(lam, x)), alg.scale(lam, f(x))))

    dim = int(np.prod(domain.shape))
    full_rank = False
    if lin <= 1e-9:
        columns = np.zeros((dim, dim), dtype=np.complex128)
        for k in range(dim):
            basis = np.zeros(domain.shape, dtype=np.complex128)
            basis.flat[k] = 1.0
            columns[:, k] = f(alg.element(domain, basis)).data.ravel()
        full_rank = _numeric_rank(columns) == dim

    mult = 0.0
    pointwise = 0.0
    for i in range(samples):
        gen = substream(seed, i)
        x = mp.sample_in_ball(domain, mp.DEFAULT_RADIUS, gen)
        y = mp.sample_in_ball(domain, mp.DEFAULT_RADIUS, gen)
        z = mp.sample_in_ball(domain, mp.DEFAULT_RADIUS, gen)
        mult = max(mult, alg.norm(mp.homomorphism_defect(f, x, y, z)))
        pointwise = max(pointwise, alg.distance(stabilize(f, regime, x, tol)[0], f(x)))

    unit_rep = verify_unit_limit(f, regime, tol)
    return IsomorphismReport(
        distinct, lin, full_rank, mult, unit_rep, pointwise, samples, tol
    )


def uniqueness_check(
    f1: MappingHandle,
    f2: MappingHandle,
    regime: Regime,
    samples: int,
    tol: float,
    seed: int,
    radius: float = mp.DEFAULT_RADIUS,
) -> float:
    """Max distance between the two stabilized maps on seeded points.

    Approximate mappings sharing one exact core stabilize to the same limit,
    so the distance stays within twice the stabilization tolerance.
    """
    worst = 0.0
    for i in range(samples):
        x = mp.sample_in_ball(f1.domain, radius, substream(seed, i))
        worst = max(worst, alg.distance(stabilize(f1, regime, x, tol)[0], stabilize(f2, regime, x, tol)[0]))
    return worst


# ---------------------------------------------------------------------------
# Scalar decomposition and the linearity certificate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalarDecomposition:
    """``lam = M * cos(t) * mu`` with integer M > 2|lam| and t in (pi/3, pi/2).

    Feeding ``cos(t) = (exp(it) + exp(-it))/2`` through additivity and torus
    homogeneity extends those two properties to full complex homogeneity;
    this is the constructive step behind the linearity certificate.
    """

    m: int
    t: float
    mu: complex

    def reconstruct(self) -> complex:
        return 0.5 * self.m * (np.exp(1j * self.t) * self.mu + np.exp(-1j * self.t) * self.mu)


def decompose_scalar(lam: complex) -> ScalarDecomposition:
    lam = complex(lam)
    if lam == 0:
        raise ValidationError("zero scalar: handled by f(0) = 0, not decomposable")
    a = abs(lam)
    m = math.floor(2.0 * a) + 1  # smallest integer strictly above 2|lam|
    t = math.acos(a / m)
    return ScalarDecomposition(m, t, lam / a)


@dataclass(frozen=True)
class LinearityReport:
    """Max mixed violation per linearity law over seeded samples."""

    samples: int
    tol: float
    violations: dict[str, float]

    @property
    def passed(self) -> bool:
        return all(v <= self.tol for v in self.violations.values())


def linearity_certificate(
    f: MappingHandle,
    samples: int,
    tol: float,
    seed: int,
    radius: float = mp.DEFAULT_RADIUS,
) -> LinearityReport:
    """Certify C-linearity through five laws.

    zero image, halving ``f(y) = 2 f(y/2)``, additivity, torus homogeneity
    over random and deterministic unimodular scalars, and full complex
    homogeneity routed through the scalar decomposition reconstruction.
    """
    worst = {
        "zero_at_zero": alg.norm(f(alg.zero(f.domain))),
        "halving": 0.0,
        "additivity": 0.0,
        "torus_homogeneity": 0.0,
        "complex_homogeneity": 0.0,
    }
    for i in range(samples):
        gen = substream(seed, i)
        x = mp.sample_in_ball(f.domain, radius, gen)
        y = mp.sample_in_ball(f.domain, radius, gen)
        worst["halving"] = max(
            worst["halving"], alg.mixed_violation(f(y), alg.scale(2.0, f(alg.scale(0.5, y))))
        )
        worst["additivity"] = max(
            worst["additivity"], alg.mixed_violation(f(x + y), f(x) + f(y))
        )
        fx = f(x)
        for mu in mp.TORUS_PROBES + (np.exp(2j * np.pi * gen.random()),):
            worst["torus_homogeneity"] = max(
                worst["torus_homogeneity"],
                alg.mixed_violation(f(alg.scale(mu, x)), alg.scale(mu, fx)),
            )
        lam = complex(complex_gaussian(gen, (1,))[0])
        if lam != 0:
            dec = decompose_scalar(lam)
            phase_sum = 0.5 * dec.m * (
                np.exp(1j * dec.t) * dec.mu + np.exp(-1j * dec.t) * dec.mu
            )
            worst["complex_homogeneity"] = max(
                worst["complex_homogeneity"],
                alg.mixed_violation(f(alg.scale(lam, x)), alg.scale(phase_sum, fx)),
            )
    return LinearityReport(samples, tol, worst)
