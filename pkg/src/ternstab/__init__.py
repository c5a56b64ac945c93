"""Numerical verification of Hyers-Ulam stability on C*-ternary algebras.

Concrete finite-dimensional C*-ternary algebras, the Cauchy-Jensen defect
machinery, the direct-method stabilizer with closed-form proximity bounds,
the critical-exponent counterexample, and a reproducible experiment harness.
"""

from .algebra import (
    AlgebraDescriptor,
    AlgebraKind,
    Element,
    add,
    check_axioms,
    diagonal_algebra,
    distance,
    element,
    induced_cstar_check,
    matrix_algebra,
    module_algebra,
    norm,
    random_element,
    random_unitary,
    scale,
    ternary_product,
    unit,
    zero,
)
from .counterexample import (
    EnvelopeLevel,
    GajdaFunction,
    check_envelope,
    divergence_profile,
    eval_closed_form,
    eval_series,
    phi,
)
from .errors import (
    ConfigError,
    ConstructionError,
    DegenerateSamplingError,
    DivergenceError,
    NonUnitalError,
    PowerIterationError,
    RegimeError,
    ShapeMismatchError,
    TernstabError,
    ToleranceUnreachableError,
    ValidationError,
)
from .harness import ExperimentConfig, ExperimentReport, Scenario, emit_report, run_scenario
from .mappings import (
    ControlForm,
    MappingHandle,
    NormPowerBump,
    cauchy_jensen_defect,
    derivation_defect,
    estimate_theta,
    homomorphism_defect,
    make_exact_derivation,
    make_exact_diagonal_homomorphism,
    make_exact_homomorphism,
    perturb,
)
from .stabilizer import (
    Direction,
    Regime,
    bound,
    check_isomorphism,
    decompose_scalar,
    linearity_certificate,
    one_step_bound,
    stabilize,
    stabilized_handle,
    steps_needed,
    uniqueness_check,
    verify_additivity,
    verify_derivation,
    verify_homomorphism,
    verify_near,
    verify_unit_limit,
)

__version__ = "0.1.0"
