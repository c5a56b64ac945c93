"""Independent oracles used by the test suite.

These deliberately avoid the code paths they are used to check: singular
values come from one-sided Jacobi rotations rather than power iteration, and
the counterexample series is summed in exact rational arithmetic.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


def jacobi_singular_values(mat, sweeps: int = 100, tol: float = 1e-15) -> np.ndarray:
    """All singular values via one-sided (Hestenes) Jacobi rotations.

    Column pairs are rotated until every pair is numerically orthogonal; the
    singular values are the final column norms, sorted descending.
    """
    m = np.array(mat, dtype=np.complex128)
    ncols = m.shape[1]
    for _ in range(sweeps):
        rotated = False
        for p in range(ncols - 1):
            for q in range(p + 1, ncols):
                app = np.vdot(m[:, p], m[:, p]).real
                aqq = np.vdot(m[:, q], m[:, q]).real
                apq = np.vdot(m[:, p], m[:, q])
                if abs(apq) <= tol * math.sqrt(app * aqq) or abs(apq) == 0.0:
                    continue
                rotated = True
                # factor out the phase so a real rotation diagonalizes the pair:
                # <p, conj(phase) q> = |apq| is real
                phase = apq / abs(apq)
                vq = np.conj(phase) * m[:, q]
                tau = (aqq - app) / (2.0 * abs(apq))
                t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.hypot(1.0, t)
                s = t * c
                up = c * m[:, p] - s * vq
                uq = s * m[:, p] + c * vq
                m[:, p], m[:, q] = up, uq
        if not rotated:
            break
    values = np.sqrt(np.sum(np.abs(m) ** 2, axis=0))
    return np.sort(values)[::-1]


def jacobi_operator_norm(mat) -> float:
    return float(jacobi_singular_values(mat)[0])


# ---------------------------------------------------------------------------
# Exact rational evaluation of the sawtooth-series counterexample
# ---------------------------------------------------------------------------


def exact_saturation_index(x: Fraction) -> int:
    """Smallest n >= 0 with 2**n * |x| >= 1, in exact arithmetic."""
    ax = abs(x)
    if ax == 0:
        raise ValueError("undefined at zero")
    n = 0
    while (1 << n) * ax < 1:
        n += 1
    return n


def exact_series_value(x: Fraction, mu: Fraction) -> Fraction:
    """Exact sum of the full series: n0 linear terms plus the saturated tail."""
    if x == 0:
        return Fraction(0)
    n0 = exact_saturation_index(x)
    sign = 1 if x > 0 else -1
    return mu * x * n0 + sign * mu * Fraction(2, 2**n0)


def exact_rescaled_iterate(m: int, mu: Fraction = Fraction(1, 6)) -> Fraction:
    """``3^m f(3^-m)`` exactly."""
    return 3**m * exact_series_value(Fraction(1, 3**m), mu)
