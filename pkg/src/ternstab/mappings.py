"""Mappings between algebras: exact solutions, perturbations, defects.

Exact ternary homomorphisms and derivations are constructed in closed form
and verified at construction time. Controlled perturbations add a norm-power
bump ``eps(x) = c * norm(x)**r * w`` on top of an exact core, producing test
mappings whose effective control level ``theta`` can then be measured
empirically from the Cauchy-Jensen defect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from . import algebra as alg
from .algebra import AlgebraDescriptor, AlgebraKind, Element
from .errors import (
    ConstructionError,
    DegenerateSamplingError,
    ShapeMismatchError,
    ValidationError,
)
from .rand import complex_gaussian, substream

TORUS_TOL = 1e-12
#: deterministic unit-modulus probes; the proof-critical values 1 and -1 first
TORUS_PROBES: tuple[complex, ...] = (1.0, -1.0, 1j, np.exp(2j * np.pi / 3))
DEFAULT_RADIUS = 3.0


class ControlForm(Enum):
    """Shape of the control term dominating the Cauchy-Jensen defect."""

    SUM = "sum"  # theta * (|x|^r + |y|^r + |z|^r)
    PRODUCT = "product"  # theta * |x|^r * |y|^r * |z|^r


@dataclass(frozen=True)
class MappingHandle:
    """A pure deterministic map between two algebras.

    ``eval`` must satisfy ``eval(0) = 0`` (checked for every handle built by
    this module) and must return bit-identical output on identical input.
    Handles are immutable and safe to evaluate concurrently.
    """

    domain: AlgebraDescriptor
    codomain: AlgebraDescriptor
    eval: Callable[[Element], Element]
    label: str

    def __call__(self, x: Element) -> Element:
        if x.algebra != self.domain:
            raise ShapeMismatchError(
                f"{self.label}: expected {self.domain.spec_string()}, got {x.algebra.spec_string()}"
            )
        return self.eval(x)


@dataclass(frozen=True)
class NormPowerBump:
    """Perturbation ``eps(x) = c * norm(x)**r * w`` with ``w`` of unit norm.

    Vanishes at zero (r > 0 is required for that) and has norm exactly
    ``c * norm(x)**r``, so its control level is directly measurable.
    """

    r: float
    c: float
    w: Element

    def __post_init__(self):
        if self.r <= 0:
            raise ValidationError(f"bump exponent must be positive, got {self.r}")
        if self.c < 0:
            raise ValidationError(f"bump size must be nonnegative, got {self.c}")
        if abs(alg.norm(self.w) - 1.0) > 1e-9:
            raise ValidationError("bump direction must have unit norm")


@dataclass(frozen=True)
class DefectSample:
    """One evaluated Cauchy-Jensen defect with its control value."""

    x: Element
    y: Element
    z: Element
    mu: complex
    defect_norm: float
    control_value: float


def _checked_handle(
    domain: AlgebraDescriptor,
    codomain: AlgebraDescriptor,
    fn: Callable[[Element], Element],
    label: str,
) -> MappingHandle:
    image_of_zero = fn(alg.zero(domain))
    if alg.norm(image_of_zero) != 0.0:
        raise ConstructionError(f"{label}: does not map zero to zero")
    return MappingHandle(domain, codomain, fn, label)


def _verify_defect_on_probes(
    handle: MappingHandle,
    defect: Callable[[MappingHandle, Element, Element, Element], Element],
    tol: float,
    probes: int = 8,
    seed: int = 2024,
) -> None:
    for i in range(probes):
        gen = substream(seed, i)
        x, y, z = (
            alg.element(handle.domain, complex_gaussian(gen, handle.domain.shape))
            for _ in range(3)
        )
        value = alg.norm(defect(handle, x, y, z))
        if value > tol:
            raise ConstructionError(
                f"{handle.label}: construction identity violated ({value:.3e} > {tol:.1e})"
            )


def identity_map(domain: AlgebraDescriptor) -> MappingHandle:
    return _checked_handle(domain, domain, lambda x: x, "identity")


def zero_map(domain: AlgebraDescriptor, codomain: AlgebraDescriptor | None = None) -> MappingHandle:
    codomain = codomain or domain
    return _checked_handle(domain, codomain, lambda x: alg.zero(codomain), "zero")


def conjugation_map(domain: AlgebraDescriptor) -> MappingHandle:
    """Entrywise conjugation: additive but only conjugate-linear, so it fails
    torus homogeneity at mu = i. Useful as a negative control."""
    return _checked_handle(
        domain, domain, lambda x: alg.element(domain, np.conj(x.data)), "conjugation"
    )


def make_exact_homomorphism(u: Element, v: Element) -> MappingHandle:
    """Exact ternary homomorphism ``H(x) = u @ x @ v`` for unitary u, v.

    Unitarity makes the middle-slot conjugations cancel:
    ``(u x v)(u y v)*(u z v) = u x y* z v``.
    """
    if u.algebra.kind is not AlgebraKind.MATRIX_CONJUGATION or u.algebra != v.algebra:
        raise ValidationError("u and v must be square matrices over one algebra")
    if not alg.is_unitary(u) or not alg.is_unitary(v):
        raise ValidationError("u and v must be unitary to 1e-12")
    desc = u.algebra
    ud, vd = u.data, v.data
    handle = _checked_handle(
        desc, desc, lambda x: alg.element(desc, ud @ x.data @ vd), "matrix homomorphism"
    )
    _verify_defect_on_probes(handle, homomorphism_defect, 1e-10)
    return handle


def make_exact_diagonal_homomorphism(
    sigma: Sequence[int], alpha: Element
) -> MappingHandle:
    """Exact homomorphism on the diagonal algebra: ``H(x)_i = alpha_i * x[sigma(i)]``.

    ``sigma`` must be a permutation of ``range(d)`` and every ``alpha_i``
    unimodular; then ``|alpha_i| = 1`` makes the componentwise conjugations
    cancel.
    """
    desc = alpha.algebra
    if desc.kind is not AlgebraKind.POINTWISE_DIAGONAL:
        raise ValidationError("alpha must live in a diagonal algebra")
    perm = list(sigma)
    if sorted(perm) != list(range(desc.dim)):
        raise ValidationError(f"sigma must be a permutation of range({desc.dim})")
    if np.max(np.abs(np.abs(alpha.data) - 1.0)) > TORUS_TOL:
        raise ValidationError("alpha entries must be unimodular")
    idx = np.array(perm)
    ad = alpha.data
    handle = _checked_handle(
        desc, desc, lambda x: alg.element(desc, ad * x.data[idx]), "diagonal homomorphism"
    )
    _verify_defect_on_probes(handle, homomorphism_defect, 1e-10)
    return handle


def make_exact_derivation(a: Element) -> MappingHandle:
    """Exact ternary derivation ``delta(x) = a @ x - x @ a`` for skew-Hermitian a.

    Skew-Hermitian means ``a* = -a``; the sign flip under the middle-slot
    conjugation is what makes the three Leibniz terms telescope.
    """
    if a.algebra.kind is not AlgebraKind.MATRIX_CONJUGATION:
        raise ValidationError("derivations are constructed on the matrix algebra")
    if alg.matrix_operator_norm(a.data + a.data.conj().T) > 1e-12:
        raise ValidationError("a must be skew-Hermitian to 1e-12")
    desc = a.algebra
    ad = a.data
    handle = _checked_handle(
        desc, desc, lambda x: alg.element(desc, ad @ x.data - x.data @ ad), "commutator derivation"
    )
    _verify_defect_on_probes(handle, derivation_defect, 1e-10)
    return handle


def perturb(handle: MappingHandle, spec: NormPowerBump | None) -> MappingHandle:
    """Add a norm-power bump to a handle; ``spec=None`` returns the handle."""
    if spec is None:
        return handle
    if spec.w.algebra != handle.codomain:
        raise ShapeMismatchError("bump direction must live in the codomain")
    base, r, c, w = handle.eval, spec.r, spec.c, spec.w

    def bumped(x: Element) -> Element:
        return base(x) + alg.scale(c * alg.norm(x) ** r, w)

    return _checked_handle(
        handle.domain, handle.codomain, bumped, f"{handle.label} + bump(r={spec.r}, c={spec.c})"
    )


def _check_torus(mu: complex) -> complex:
    mu = complex(mu)
    if abs(abs(mu) - 1.0) > TORUS_TOL:
        raise ValidationError(f"mu must be unimodular, |mu| = {abs(mu)!r}")
    return mu


def cauchy_jensen_defect(
    f: MappingHandle, mu: complex, x: Element, y: Element, z: Element
) -> Element:
    """``3 f((mu x + mu y + mu z)/3) - 2 mu f((x+y)/2) - mu f(z)``.

    Vanishes identically over all unimodular ``mu`` exactly when ``f`` is
    C-linear.
    """
    mu = _check_torus(mu)
    mean3 = f(alg.scale(mu / 3.0, x + y + z))
    mean2 = f(alg.scale(0.5, x + y))
    return alg.scale(3.0, mean3) - alg.scale(2.0 * mu, mean2) - alg.scale(mu, f(z))


def homomorphism_defect(f: MappingHandle, x: Element, y: Element, z: Element) -> Element:
    """``f([x,y,z]) - [f(x), f(y), f(z)]``."""
    return f(alg.ternary_product(x, y, z)) - alg.ternary_product(f(x), f(y), f(z))


def derivation_defect(f: MappingHandle, x: Element, y: Element, z: Element) -> Element:
    """``f([x,y,z]) - [f(x),y,z] - [x,f(y),z] - [x,y,f(z)]``."""
    return (
        f(alg.ternary_product(x, y, z))
        - alg.ternary_product(f(x), y, z)
        - alg.ternary_product(x, f(y), z)
        - alg.ternary_product(x, y, f(z))
    )


def sample_in_ball(
    domain: AlgebraDescriptor, radius: float, gen: np.random.Generator
) -> Element:
    """Random element with norm uniform in (0, radius]: Gaussian direction,
    normalized in the algebra norm, then scaled by a uniform radius."""
    direction = alg.element(domain, complex_gaussian(gen, domain.shape))
    n = alg.norm(direction)
    if n == 0.0:  # probability-zero; resample deterministically
        return sample_in_ball(domain, radius, gen)
    return alg.scale(radius * (1.0 - gen.random()) / n, direction)


def control_value(form: ControlForm, r: float, nx: float, ny: float, nz: float) -> float:
    if form is ControlForm.SUM:
        return nx**r + ny**r + nz**r
    return nx**r * ny**r * nz**r


def sample_defects(
    f: MappingHandle,
    form: ControlForm,
    r: float,
    samples: int,
    radius: float,
    seed: int,
) -> list[DefectSample]:
    """Seeded defect/control samples used by :func:`estimate_theta`.

    Each triple is evaluated against the four deterministic torus probes and
    one uniform random phase; triples with vanishing control are skipped.
    Sample ``i`` depends only on ``(seed, i)``, never on ``samples``.
    """
    if samples < 1:
        raise ValidationError("samples must be >= 1")
    if radius <= 0:
        raise ValidationError("radius must be positive")
    out: list[DefectSample] = []
    for i in range(samples):
        gen = substream(seed, i)
        x = sample_in_ball(f.domain, radius, gen)
        y = sample_in_ball(f.domain, radius, gen)
        z = sample_in_ball(f.domain, radius, gen)
        control = control_value(form, r, alg.norm(x), alg.norm(y), alg.norm(z))
        if control <= 0.0:
            continue
        mus = TORUS_PROBES + (np.exp(2j * np.pi * gen.random()),)
        for mu in mus:
            defect = alg.norm(cauchy_jensen_defect(f, mu, x, y, z))
            out.append(DefectSample(x, y, z, complex(mu), defect, control))
    return out


def estimate_theta(
    f: MappingHandle,
    form: ControlForm,
    r: float,
    samples: int,
    radius: float = DEFAULT_RADIUS,
    seed: int = 0,
) -> float:
    """Empirical control level: max of ``defect / control`` over the samples."""
    collected = sample_defects(f, form, r, samples, radius, seed)
    if not collected:
        raise DegenerateSamplingError("every sampled triple had vanishing control")
    return max(s.defect_norm / s.control_value for s in collected)
