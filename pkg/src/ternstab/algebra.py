"""Finite-dimensional C*-ternary algebras.

A C*-ternary algebra is a complex Banach space with a triple product
``[x, y, z]`` that is linear in the outer slots, conjugate-linear in the
middle slot, associative in the generalized sense, submultiplicative, and
satisfies the cube identity ``norm([x, x, x]) == norm(x)**3``.

Three concrete instances are provided:

* ``matrix:n`` -- square complex matrices with ``[a, b, c] = a @ b* @ c``
  under the operator norm (noncommutative, unital),
* ``diag:d`` -- complex d-vectors with the componentwise product
  ``a * conj(b) * c`` under the sup norm (commutative, unital),
* ``module:d`` -- complex d-vectors with ``[a, b, c] = <a, b> c`` under the
  Euclidean norm (the inner-product-module instance; no unit for d > 1).

All elements are immutable values; every operation is a pure function of its
inputs, so elements may be shared freely between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import (
    NonUnitalError,
    PowerIterationError,
    ShapeMismatchError,
    ValidationError,
)
from .rand import complex_gaussian, substream

MAX_MATRIX_DIM = 16
NORM_RTOL = 1e-13
NORM_MAX_ITER = 10_000


class AlgebraKind(Enum):
    MATRIX_CONJUGATION = "matrix"
    POINTWISE_DIAGONAL = "diag"
    INNER_PRODUCT_MODULE = "module"


@dataclass(frozen=True)
class AlgebraDescriptor:
    """Which concrete algebra an element lives in, and its dimension."""

    kind: AlgebraKind
    dim: int

    def __post_init__(self):
        if not isinstance(self.dim, int) or self.dim < 1:
            raise ValidationError(f"dimension must be a positive integer, got {self.dim!r}")
        if self.kind is AlgebraKind.MATRIX_CONJUGATION and self.dim > MAX_MATRIX_DIM:
            raise ValidationError(f"matrix dimension capped at {MAX_MATRIX_DIM}, got {self.dim}")

    @property
    def shape(self) -> tuple[int, ...]:
        if self.kind is AlgebraKind.MATRIX_CONJUGATION:
            return (self.dim, self.dim)
        return (self.dim,)

    @property
    def is_unital(self) -> bool:
        if self.kind is AlgebraKind.INNER_PRODUCT_MODULE:
            return self.dim == 1
        return True

    def spec_string(self) -> str:
        return f"{self.kind.value}:{self.dim}"

    @staticmethod
    def parse(text: str) -> "AlgebraDescriptor":
        """Parse ``matrix:N``, ``diag:D`` or ``module:D``."""
        try:
            kind_str, dim_str = text.split(":")
            return AlgebraDescriptor(AlgebraKind(kind_str), int(dim_str))
        except (ValueError, KeyError) as exc:
            raise ValidationError(f"cannot parse algebra descriptor {text!r}") from exc


def matrix_algebra(n: int) -> AlgebraDescriptor:
    return AlgebraDescriptor(AlgebraKind.MATRIX_CONJUGATION, n)


def diagonal_algebra(d: int) -> AlgebraDescriptor:
    return AlgebraDescriptor(AlgebraKind.POINTWISE_DIAGONAL, d)


def module_algebra(d: int) -> AlgebraDescriptor:
    return AlgebraDescriptor(AlgebraKind.INNER_PRODUCT_MODULE, d)


@dataclass(frozen=True, eq=False)
class Element:
    """An immutable dense element of a concrete algebra.

    The backing array is complex128, C-contiguous and write-protected.
    Construct through :func:`element` (or the sampling helpers), which
    validate shape and finiteness.
    """

    algebra: AlgebraDescriptor
    data: np.ndarray
    _norm_cache: float | None = field(default=None, repr=False)

    def __repr__(self) -> str:  # keep short; matrices print poorly inline
        return f"Element({self.algebra.spec_string()})"

    def __add__(self, other: "Element") -> "Element":
        return add(self, other)

    def __sub__(self, other: "Element") -> "Element":
        return add(self, scale(-1.0, other))

    def __neg__(self) -> "Element":
        return scale(-1.0, self)

    def __rmul__(self, lam: complex) -> "Element":
        return scale(lam, self)

    def __truediv__(self, lam: complex) -> "Element":
        return scale(1.0 / lam, self)


def element(algebra: AlgebraDescriptor, data) -> Element:
    """Validating constructor: coerces to complex128 and freezes the buffer."""
    arr = np.array(data, dtype=np.complex128, order="C")
    if arr.shape != algebra.shape:
        raise ShapeMismatchError(
            f"data shape {arr.shape} does not match {algebra.spec_string()} shape {algebra.shape}"
        )
    if not np.all(np.isfinite(arr.view(np.float64))):
        raise ValidationError("element entries must be finite")
    arr.setflags(write=False)
    return Element(algebra, arr)


def zero(algebra: AlgebraDescriptor) -> Element:
    return element(algebra, np.zeros(algebra.shape))


def unit(algebra: AlgebraDescriptor) -> Element | None:
    """The unit element ``e`` with ``[x,e,e] = [e,e,x] = x``, or None.

    Matrices have the identity, the diagonal algebra the all-ones vector.
    The inner-product module has no unit for d > 1: ``[x,e,e] = <x,e> e``
    stays inside the line spanned by ``e``, so it cannot reproduce every x.
    """
    kind = algebra.kind
    if kind is AlgebraKind.MATRIX_CONJUGATION:
        return element(algebra, np.eye(algebra.dim))
    if kind is AlgebraKind.POINTWISE_DIAGONAL:
        return element(algebra, np.ones(algebra.dim))
    if algebra.dim == 1:
        return element(algebra, np.ones(1))
    return None


def _check_same(*xs: Element) -> AlgebraDescriptor:
    desc = xs[0].algebra
    for x in xs[1:]:
        if x.algebra != desc:
            raise ShapeMismatchError(
                f"mixed algebras: {desc.spec_string()} vs {x.algebra.spec_string()}"
            )
    return desc


def add(x: Element, y: Element) -> Element:
    desc = _check_same(x, y)
    return element(desc, x.data + y.data)


def scale(lam: complex, x: Element) -> Element:
    lam = complex(lam)
    if not (math.isfinite(lam.real) and math.isfinite(lam.imag)):
        raise ValidationError("scalar must be finite")
    out = element(x.algebra, lam * x.data)
    if x._norm_cache is not None:  # norms are absolutely homogeneous
        object.__setattr__(out, "_norm_cache", abs(lam) * x._norm_cache)
    return out


def ternary_product(a: Element, b: Element, c: Element) -> Element:
    """The triple product of the algebra the operands live in.

    matrix: ``a @ b* @ c`` (conjugate transpose in the middle);
    diag:   componentwise ``a * conj(b) * c``;
    module: ``<a, b> c`` with ``<a, b> = sum(a * conj(b))``.
    """
    desc = _check_same(a, b, c)
    kind = desc.kind
    if kind is AlgebraKind.MATRIX_CONJUGATION:
        out = a.data @ b.data.conj().T @ c.data
    elif kind is AlgebraKind.POINTWISE_DIAGONAL:
        out = a.data * np.conj(b.data) * c.data
    else:
        out = np.vdot(b.data, a.data) * c.data
    return element(desc, out)


def _vec_norm(v: np.ndarray) -> float:
    return math.sqrt(float(np.vdot(v, v).real))


_RESCALE_THRESHOLD = 2.0**200
_RESCALE_FACTOR = 2.0**-200  # exact power of two: rescaling never perturbs the iterates


def _power_iteration_start_vectors(n: int) -> list[np.ndarray]:
    starts = [np.full(n, 1.0 / math.sqrt(n), dtype=np.complex128)]
    for i in range(n):
        e = np.zeros(n, dtype=np.complex128)
        e[i] = 1.0
        starts.append(e)
    return starts


def matrix_operator_norm(
    mat: np.ndarray, rtol: float = NORM_RTOL, max_iter: int = NORM_MAX_ITER
) -> float:
    """Largest singular value by power iteration on ``mat* @ mat``.

    The matrix is pre-scaled by its largest entry modulus so the dominant
    eigenvalue of the Gram matrix lies in [1, n^2]; the eigenvalue estimate
    is the norm quotient ``|g v| / |v|``, which is exact (ratio of identical
    floats) on scalar multiples of the identity. The start vector is the
    normalized all-ones vector; if it happens to lie in the kernel the
    iteration restarts from successive basis vectors.
    """
    amax = float(np.abs(mat).max()) if mat.size else 0.0
    if amax == 0.0:
        return 0.0
    m = mat / amax
    g = m.conj().T @ m
    for v0 in _power_iteration_start_vectors(mat.shape[0]):
        v = v0
        nv = _vec_norm(v)
        lam_prev = math.inf
        iterations = 0
        while iterations < max_iter:
            w = g @ v
            nw = _vec_norm(w)
            if nw == 0.0:
                break  # start vector in the kernel; try the next one
            lam = nw / nv
            if abs(lam - lam_prev) <= rtol * lam:
                return amax * math.sqrt(lam)
            lam_prev = lam
            v, nv = w, nw
            if nv > _RESCALE_THRESHOLD:
                v = v * _RESCALE_FACTOR
                nv = nv * _RESCALE_FACTOR
            iterations += 1
        if iterations >= max_iter:
            raise PowerIterationError(iterations)
    # Unreachable for finite nonzero input: the Gram matrix of a nonzero
    # matrix has a nonzero column, so some basis start survives.
    raise PowerIterationError(0, "no start vector escaped the kernel")


def norm(x: Element) -> float:
    """The algebra norm: operator norm / sup of moduli / Euclidean norm."""
    if x._norm_cache is not None:
        return x._norm_cache
    kind = x.algebra.kind
    if kind is AlgebraKind.MATRIX_CONJUGATION:
        value = matrix_operator_norm(x.data)
    elif kind is AlgebraKind.POINTWISE_DIAGONAL:
        value = float(np.abs(x.data).max())
    else:
        value = _vec_norm(x.data)
    object.__setattr__(x, "_norm_cache", value)
    return value


def distance(x: Element, y: Element) -> float:
    return norm(x - y)


def mixed_violation(lhs: Element, rhs: Element) -> float:
    """Mixed absolute/relative violation ``|lhs - rhs| / (1 + |rhs|)``."""
    return distance(lhs, rhs) / (1.0 + norm(rhs))


def scalar_violation(lhs: float, rhs: float) -> float:
    return abs(lhs - rhs) / (1.0 + abs(rhs))


def random_element(algebra: AlgebraDescriptor, scale_: float, seed: int) -> Element:
    """Element with i.i.d. complex Gaussian entries times ``scale_``."""
    if scale_ <= 0:
        raise ValidationError(f"scale must be positive, got {scale_}")
    gen = substream(seed)
    return element(algebra, scale_ * complex_gaussian(gen, algebra.shape))


def _orthonormal_columns(a: np.ndarray) -> np.ndarray:
    q = a.astype(np.complex128).copy()
    n = q.shape[1]
    for j in range(n):
        for _ in range(2):  # second pass mops up cancellation error
            for k in range(j):
                q[:, j] -= np.vdot(q[:, k], q[:, j]) * q[:, k]
        nj = _vec_norm(q[:, j])
        if nj < 1e-12:
            raise ValidationError("degenerate matrix in orthonormalization")
        q[:, j] /= nj
    return q


def random_unitary(n: int, seed: int) -> Element:
    """Seeded unitary: Gram-Schmidt on a Gaussian matrix, diagonal phase-fixed.

    Each column is rotated so the diagonal entry is real nonnegative, which
    pins the residual phase freedom and makes the result a pure function of
    the seed.
    """
    desc = matrix_algebra(n)
    q = _orthonormal_columns(complex_gaussian(substream(seed), (n, n)))
    for j in range(n):
        d = q[j, j]
        if abs(d) > 1e-300:
            q[:, j] *= np.conj(d) / abs(d)
    return element(desc, q)


def is_unitary(u: Element, tol: float = 1e-12) -> bool:
    if u.algebra.kind is not AlgebraKind.MATRIX_CONJUGATION:
        return False
    gram = u.data.conj().T @ u.data
    return matrix_operator_norm(gram - np.eye(u.algebra.dim)) <= tol


# ---------------------------------------------------------------------------
# Executable axiom suite
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AxiomReport:
    """Per-law maximum mixed violations over a seeded sample set."""

    algebra: str
    samples: int
    tol: float
    seed: int
    violations: dict[str, float]

    @property
    def passed(self) -> bool:
        return all(v <= self.tol for v in self.violations.values())

    @property
    def worst(self) -> float:
        return max(self.violations.values())


def ternary_axiom_violations(
    x: Element,
    y: Element,
    z: Element,
    w: Element,
    v: Element,
    *,
    lam: complex = 1.0 + 0.0j,
    x2: Element | None = None,
    y2: Element | None = None,
    z2: Element | None = None,
) -> dict[str, float]:
    """Mixed violations of the algebra laws on one explicit tuple.

    The two associativity identities are checked as the chain
    ``[x,y,[z,w,v]] = [x,[w,z,y],v] = [[x,y,z],w,v]``; linearity is checked
    against ``lam`` and the optional second elements (zero when omitted).
    """
    desc = _check_same(x, y, z, w, v)
    x2 = x2 if x2 is not None else zero(desc)
    y2 = y2 if y2 is not None else zero(desc)
    z2 = z2 if z2 is not None else zero(desc)

    inner = ternary_product(x, y, ternary_product(z, w, v))
    middle = ternary_product(x, ternary_product(w, z, y), v)
    outer = ternary_product(ternary_product(x, y, z), w, v)

    base = ternary_product(x, y, z)
    lin_first = mixed_violation(
        ternary_product(scale(lam, x) + x2, y, z),
        scale(lam, base) + ternary_product(x2, y, z),
    )
    lin_middle = mixed_violation(
        ternary_product(x, scale(lam, y) + y2, z),
        scale(np.conj(lam), base) + ternary_product(x, y2, z),
    )
    lin_third = mixed_violation(
        ternary_product(x, y, scale(lam, z) + z2),
        scale(lam, base) + ternary_product(x, y, z2),
    )

    norm_product = norm(x) * norm(y) * norm(z)
    submult = max(0.0, norm(base) - norm_product) / (1.0 + norm_product)
    cube = scalar_violation(norm(ternary_product(x, x, x)), norm(x) ** 3)

    return {
        "associativity_middle": mixed_violation(inner, middle),
        "associativity_outer": mixed_violation(middle, outer),
        "linearity_first_slot": lin_first,
        "conjugate_linearity_middle_slot": lin_middle,
        "linearity_third_slot": lin_third,
        "submultiplicativity": submult,
        "cstar_cube_identity": cube,
    }


def check_axioms(
    algebra: AlgebraDescriptor, samples: int, tol: float, seed: int
) -> AxiomReport:
    """Check the C*-ternary laws on seeded random 5-tuples.

    Sample ``i`` is drawn from an independent substream keyed by ``i``, so
    results for a given index never depend on the total sample count.
    """
    if samples < 1:
        raise ValidationError("samples must be >= 1")
    worst: dict[str, float] = {}
    for i in range(samples):
        gen = substream(seed, i)
        xs = [element(algebra, complex_gaussian(gen, algebra.shape)) for _ in range(8)]
        lam = complex(complex_gaussian(gen, (1,))[0])
        found = ternary_axiom_violations(
            *xs[:5], lam=lam, x2=xs[5], y2=xs[6], z2=xs[7]
        )
        for law, value in found.items():
            worst[law] = max(worst.get(law, 0.0), value)
    return AxiomReport(algebra.spec_string(), samples, tol, seed, worst)


# ---------------------------------------------------------------------------
# Induced binary C*-algebra (unital case)
# ---------------------------------------------------------------------------


def circle_product(x: Element, y: Element, e: Element) -> Element:
    """The induced binary product ``x o y := [x, e, y]``."""
    return ternary_product(x, e, y)


def involution(x: Element, e: Element) -> Element:
    """The induced involution ``x* := [e, x, e]``."""
    return ternary_product(e, x, e)


def induced_cstar_violations(x: Element, y: Element, z: Element, e: Element) -> dict[str, float]:
    """Mixed violations of the unital C*-algebra laws induced by the unit."""
    prod = circle_product(x, y, e)
    assoc = mixed_violation(
        circle_product(prod, z, e), circle_product(x, circle_product(y, z, e), e)
    )
    x_star = involution(x, e)
    isometry = scalar_violation(norm(x_star), norm(x))
    anti = mixed_violation(
        involution(prod, e), circle_product(involution(y, e), x_star, e)
    )
    cstar = scalar_violation(norm(circle_product(x_star, x, e)), norm(x) ** 2)
    return {
        "associativity": assoc,
        "involution_isometry": isometry,
        "involution_antihomomorphism": anti,
        "cstar_identity": cstar,
    }


def induced_cstar_check(
    algebra: AlgebraDescriptor, samples: int, tol: float, seed: int
) -> AxiomReport:
    """Verify the induced unital C*-algebra laws on seeded random triples."""
    e = unit(algebra)
    if e is None:
        raise NonUnitalError(f"{algebra.spec_string()} has no unit")
    worst = {law: 0.0 for law in induced_cstar_violations(e, e, e, e)}
    for i in range(samples):
        gen = substream(seed, i)
        x, y, z = (
            element(algebra, complex_gaussian(gen, algebra.shape)) for _ in range(3)
        )
        for law, value in induced_cstar_violations(x, y, z, e).items():
            if value > worst[law]:
                worst[law] = value
    return AxiomReport(algebra.spec_string(), samples, tol, seed, worst)
