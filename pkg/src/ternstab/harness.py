"""Configuration-driven scenario runner with machine-readable reports.

A scenario builds a deterministic instance (algebra, exact core mapping,
perturbation), runs the relevant verification suite, and reduces the outcome
to one row per checked law. Reports are bit-deterministic for a fixed config:
every random stream is derived from the config seed, reductions happen in
sample-index order, and the JSON rendering carries no timing data (wall-clock
lives only on the in-memory report object).
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from . import algebra as alg
from . import counterexample as cx
from . import mappings as mp
from . import stabilizer as st
from .algebra import AlgebraDescriptor, AlgebraKind
from .errors import ConfigError, DivergenceError, TernstabError, ValidationError
from .mappings import ControlForm
from .rand import check_seed, substream
from .stabilizer import Direction, Regime

CONFIG_SCHEMA = "ternstab.config/1"
REPORT_SCHEMA = "ternstab.report/1"
#: stabilized maps inherit a defect budget of this many stabilization tolerances
DEFECT_TOL_FACTOR = 100.0
RADIUS = mp.DEFAULT_RADIUS
ENVELOPE_SLACK = 1e-12
ENVELOPE_RANGE = 10.0


class Scenario(Enum):
    AXIOMS = "axioms"
    STABILITY_SUM_CONTRACT = "stability_sum_contract"
    STABILITY_SUM_EXPAND = "stability_sum_expand"
    STABILITY_PROD_CONTRACT = "stability_prod_contract"
    STABILITY_PROD_EXPAND = "stability_prod_expand"
    DERIVATION = "derivation"
    ISOMORPHISM = "isomorphism"
    COUNTEREXAMPLE = "counterexample"
    LINEARITY = "linearity"


_STABILITY_REGIMES = {
    Scenario.STABILITY_SUM_CONTRACT: (ControlForm.SUM, Direction.CONTRACT),
    Scenario.STABILITY_SUM_EXPAND: (ControlForm.SUM, Direction.EXPAND),
    Scenario.STABILITY_PROD_CONTRACT: (ControlForm.PRODUCT, Direction.CONTRACT),
    Scenario.STABILITY_PROD_EXPAND: (ControlForm.PRODUCT, Direction.EXPAND),
}


def _require_exponent(form: ControlForm, direction: Direction, r: float) -> None:
    """The instance family needs r > 0; the theorem range depends on the regime."""
    if form is ControlForm.SUM:
        ok = r > 3.0 if direction is Direction.CONTRACT else 0.0 < r < 1.0
        rng = "r > 3" if direction is Direction.CONTRACT else "0 < r < 1"
    else:
        ok = r > 1.0 / 3.0 if direction is Direction.CONTRACT else 0.0 < r < 1.0 / 3.0
        rng = "r > 1/3" if direction is Direction.CONTRACT else "0 < r < 1/3"
    if not ok:
        raise ConfigError(f"{form.value}+{direction.value} requires {rng}, got r={r}")


@dataclass(frozen=True)
class ExperimentConfig:
    """One reproducible experiment: scenario, instance knobs, seed."""

    scenario: Scenario
    algebra: AlgebraDescriptor
    r: float = 4.0
    theta: float | None = None  # analytic control level; None -> measure empirically
    theta_samples: int = 2000
    theta_radius: float = RADIUS
    c: float = 0.01
    tol: float = 1e-10
    samples: int = 50
    seed: int = 42
    form: ControlForm | None = None  # derivation / isomorphism regime selectors
    direction: Direction | None = None

    def __post_init__(self):
        check_seed(self.seed)
        if self.tol <= 0:
            raise ConfigError(f"tol must be positive, got {self.tol}")
        if self.samples < 1:
            raise ConfigError(f"samples must be >= 1, got {self.samples}")
        if self.c < 0:
            raise ConfigError(f"c must be nonnegative, got {self.c}")
        if self.theta_radius <= 0:
            raise ConfigError(f"theta_radius must be positive, got {self.theta_radius}")
        if self.theta is None and self.theta_samples < 1:
            raise ConfigError("empirical theta requires theta_samples >= 1")
        if self.theta is not None and not (math.isfinite(self.theta) and self.theta >= 0):
            raise ConfigError(f"theta must be finite and >= 0, got {self.theta}")
        self._validate_scenario()

    def _validate_scenario(self):
        sc, kind = self.scenario, self.algebra.kind
        if sc in _STABILITY_REGIMES:
            form, direction = _STABILITY_REGIMES[sc]
            _require_exponent(form, direction, self.r)
            if kind is AlgebraKind.INNER_PRODUCT_MODULE:
                raise ConfigError("stability scenarios need an exact-core family (matrix or diag)")
        elif sc is Scenario.DERIVATION:
            if self.form is None or self.direction is None:
                raise ConfigError("derivation scenario requires form and direction")
            _require_exponent(self.form, self.direction, self.r)
            if kind is not AlgebraKind.MATRIX_CONJUGATION:
                raise ConfigError("derivation instances live on the matrix algebra")
        elif sc is Scenario.ISOMORPHISM:
            direction = self.direction or Direction.CONTRACT
            if direction is Direction.CONTRACT and not self.r > 1.0:
                raise ConfigError(f"isomorphism (contract) requires r > 1, got {self.r}")
            if direction is Direction.EXPAND and not 0.0 < self.r < 1.0:
                raise ConfigError(f"isomorphism (expand) requires 0 < r < 1, got {self.r}")
            if kind is not AlgebraKind.MATRIX_CONJUGATION:
                raise ConfigError("isomorphism instances live on the matrix algebra")
        elif sc is Scenario.COUNTEREXAMPLE:
            if self.theta is None or self.theta <= 0:
                raise ConfigError("counterexample scenario requires an analytic theta > 0")
        elif sc is Scenario.LINEARITY:
            if kind is AlgebraKind.INNER_PRODUCT_MODULE:
                raise ConfigError("linearity scenario needs an exact-core family (matrix or diag)")

    def to_dict(self) -> dict:
        return {
            "schema": CONFIG_SCHEMA,
            "scenario": self.scenario.value,
            "algebra": self.algebra.spec_string(),
            "r": self.r,
            "theta": self.theta,
            "theta_samples": self.theta_samples,
            "theta_radius": self.theta_radius,
            "c": self.c,
            "tol": self.tol,
            "samples": self.samples,
            "seed": self.seed,
            "form": self.form.value if self.form else None,
            "direction": self.direction.value if self.direction else None,
        }

    @staticmethod
    def from_dict(payload: dict) -> "ExperimentConfig":
        if not isinstance(payload, dict):
            raise ConfigError("config payload must be a JSON object")
        schema = payload.get("schema", CONFIG_SCHEMA)
        if schema != CONFIG_SCHEMA:
            raise ConfigError(f"unsupported config schema {schema!r}")
        known = {
            "schema", "scenario", "algebra", "r", "theta", "theta_samples",
            "theta_radius", "c", "tol", "samples", "seed", "form", "direction",
        }
        unknown = set(payload) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            scenario = Scenario(payload["scenario"])
            algebra = AlgebraDescriptor.parse(payload["algebra"])
        except KeyError as exc:
            raise ConfigError(f"missing config key: {exc}") from exc
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        kwargs = {}
        for key in ("r", "theta", "theta_radius", "c", "tol"):
            if key in payload and payload[key] is not None:
                kwargs[key] = float(payload[key])
        if payload.get("theta") is None and "theta" in payload:
            kwargs["theta"] = None
        for key in ("theta_samples", "samples", "seed"):
            if key in payload and payload[key] is not None:
                kwargs[key] = int(payload[key])
        if payload.get("form"):
            kwargs["form"] = ControlForm(payload["form"])
        if payload.get("direction"):
            kwargs["direction"] = Direction(payload["direction"])
        try:
            return ExperimentConfig(scenario, algebra, **kwargs)
        except ValidationError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return ExperimentConfig.from_dict(payload)


@dataclass(frozen=True)
class LawResult:
    law: str
    max_violation: float
    threshold: float
    passed: bool


@dataclass(frozen=True)
class ExperimentReport:
    """Deterministic scenario outcome; wall-clock is never serialized."""

    config: ExperimentConfig
    theta_eff: float | None
    laws: tuple[LawResult, ...]
    wall_clock_seconds: float = field(compare=False, default=0.0)

    @property
    def passed(self) -> bool:
        return all(law.passed for law in self.laws)

    def to_dict(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "scenario": self.config.scenario.value,
            "config": self.config.to_dict(),
            "theta_eff": self.theta_eff,
            "laws": [
                {
                    "law": law.law,
                    "max_violation": law.max_violation,
                    "threshold": law.threshold,
                    "pass": law.passed,
                }
                for law in self.laws
            ],
            "passed": self.passed,
        }


def render_json(report: ExperimentReport) -> str:
    """Fixed key order, shortest-round-trip floats, trailing newline."""
    return json.dumps(report.to_dict(), indent=2, allow_nan=False) + "\n"


def render_csv(report: ExperimentReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["scenario", "law", "max_violation", "threshold", "pass"])
    for law in report.laws:
        writer.writerow(
            [
                report.config.scenario.value,
                law.law,
                repr(law.max_violation),
                repr(law.threshold),
                str(law.passed).lower(),
            ]
        )
    return buf.getvalue()


def emit_report(report: ExperimentReport, format: str, path: str | Path) -> None:
    """Write the report to ``path`` as ``json`` or ``csv``."""
    if format == "json":
        text = render_json(report)
    elif format == "csv":
        text = render_csv(report)
    else:
        raise ConfigError(f"unknown report format {format!r}")
    Path(path).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# Instance builders (all randomness derived from the config seed)
# ---------------------------------------------------------------------------


def _derive_seed(seed: int, tag: int) -> int:
    return int(substream(seed, tag).integers(0, 2**63 - 1))


def _unit_direction(algebra: AlgebraDescriptor, seed: int) -> alg.Element:
    g = alg.random_element(algebra, 1.0, seed)
    return alg.scale(1.0 / alg.norm(g), g)


def _orthogonal_direction(w: alg.Element, seed: int) -> alg.Element:
    """Unit-norm direction orthogonal to ``w`` in the entrywise inner product."""
    g = alg.random_element(w.algebra, 1.0, seed)
    overlap = np.vdot(w.data, g.data) / np.vdot(w.data, w.data)
    ortho = alg.element(w.algebra, g.data - overlap * w.data)
    return alg.scale(1.0 / alg.norm(ortho), ortho)


def _exact_homomorphism(algebra: AlgebraDescriptor, seed: int) -> mp.MappingHandle:
    if algebra.kind is AlgebraKind.MATRIX_CONJUGATION:
        u = alg.random_unitary(algebra.dim, _derive_seed(seed, 10))
        v = alg.random_unitary(algebra.dim, _derive_seed(seed, 11))
        return mp.make_exact_homomorphism(u, v)
    gen = substream(seed, 10)
    sigma = list(gen.permutation(algebra.dim))
    alpha = alg.element(algebra, np.exp(2j * np.pi * gen.random(algebra.dim)))
    return mp.make_exact_diagonal_homomorphism(sigma, alpha)


def _exact_derivation(algebra: AlgebraDescriptor, seed: int) -> mp.MappingHandle:
    g = alg.random_element(algebra, 1.0, _derive_seed(seed, 10))
    a = alg.element(algebra, 0.5 * (g.data - g.data.conj().T))
    return mp.make_exact_derivation(a)


def _bumped(core, form: ControlForm, r: float, c: float, seed: int, tag: int = 12):
    rho = r if form is ControlForm.SUM else 3.0 * r
    w = _unit_direction(core.codomain, _derive_seed(seed, tag))
    return mp.perturb(core, mp.NormPowerBump(rho, c, w)), rho, w


def _resolve_theta(config: ExperimentConfig, f, form: ControlForm) -> float:
    if config.theta is not None:
        return config.theta
    return mp.estimate_theta(
        f, form, config.r, config.theta_samples, config.theta_radius, _derive_seed(config.seed, 13)
    )


# ---------------------------------------------------------------------------
# Scenario implementations
# ---------------------------------------------------------------------------


def _run_axioms(config: ExperimentConfig) -> tuple[float | None, list[LawResult]]:
    report = alg.check_axioms(config.algebra, config.samples, config.tol, config.seed)
    laws = [
        LawResult(name, value, config.tol, value <= config.tol)
        for name, value in report.violations.items()
    ]
    if config.algebra.is_unital:
        induced = alg.induced_cstar_check(
            config.algebra, config.samples, config.tol, _derive_seed(config.seed, 21)
        )
        laws += [
            LawResult(f"induced_{name}", value, config.tol, value <= config.tol)
            for name, value in induced.violations.items()
        ]
    return None, laws


def _stability_laws(
    config: ExperimentConfig,
    core,
    f,
    form: ControlForm,
    direction: Direction,
    defect_check,
    defect_label: str,
    with_uniqueness: bool,
) -> tuple[float, list[LawResult]]:
    theta_eff = _resolve_theta(config, f, form)
    regime = Regime(form, direction, config.r, theta_eff)
    stab = st.stabilized_handle(f, regime, config.tol)
    defect_tol = DEFECT_TOL_FACTOR * config.tol

    near = st.verify_near(
        f, stab, regime, config.samples, _derive_seed(config.seed, 14), config.tol
    )
    laws = [LawResult("near_bound", near.max_excess, 0.0, near.passed)]

    defect = defect_check(stab, config.samples, defect_tol, _derive_seed(config.seed, 15))
    laws.append(LawResult(defect_label, defect.max_defect, defect_tol, defect.passed))

    additivity = st.verify_additivity(
        stab, config.samples, defect_tol, _derive_seed(config.seed, 16)
    )
    laws.append(
        LawResult("additivity_defect", additivity.max_defect, defect_tol, additivity.passed)
    )

    if with_uniqueness:
        _, rho, w = _bumped(core, form, config.r, config.c, config.seed)
        w2 = _orthogonal_direction(w, _derive_seed(config.seed, 17))
        f2 = mp.perturb(core, mp.NormPowerBump(rho, config.c, w2))
        dist = st.uniqueness_check(
            f, f2, regime, config.samples, config.tol, _derive_seed(config.seed, 18)
        )
        limit = 2.0 * config.tol + 1e-10
        laws.append(LawResult("uniqueness", dist, limit, dist <= limit))
    return theta_eff, laws


def _run_stability(config: ExperimentConfig) -> tuple[float | None, list[LawResult]]:
    form, direction = _STABILITY_REGIMES[config.scenario]
    core = _exact_homomorphism(config.algebra, config.seed)
    f, _, _ = _bumped(core, form, config.r, config.c, config.seed)
    return _stability_laws(
        config,
        core,
        f,
        form,
        direction,
        st.verify_homomorphism,
        "homomorphism_defect",
        with_uniqueness=(config.scenario is Scenario.STABILITY_SUM_CONTRACT),
    )


def _run_derivation(config: ExperimentConfig) -> tuple[float | None, list[LawResult]]:
    core = _exact_derivation(config.algebra, config.seed)
    f, _, _ = _bumped(core, config.form, config.r, config.c, config.seed)
    return _stability_laws(
        config,
        core,
        f,
        config.form,
        config.direction,
        st.verify_derivation,
        "derivation_defect",
        with_uniqueness=False,
    )


def _run_isomorphism(config: ExperimentConfig) -> tuple[float | None, list[LawResult]]:
    u = alg.random_unitary(config.algebra.dim, _derive_seed(config.seed, 10))
    u_star = alg.element(config.algebra, u.data.conj().T)
    f = mp.make_exact_homomorphism(u, u_star)
    direction = config.direction or Direction.CONTRACT
    theta = config.theta if config.theta is not None else 1.0
    # exact multiplicativity replaces the conclusion-range requirement, so the
    # contract direction only needs iteration convergence (r > 1)
    regime = Regime(
        ControlForm.SUM, direction, config.r, theta,
        allow_subcritical=_subcritical_needed(direction, config.r),
    )
    rep = st.check_isomorphism(f, regime, config.samples, config.tol, _derive_seed(config.seed, 20))
    limit = 2.0 * config.tol + 1e-10
    laws = [
        LawResult("distinct_images", 0.0 if rep.distinct_images else 1.0, 0.0, rep.distinct_images),
        LawResult("linearized_full_rank", 0.0 if rep.full_rank else 1.0, 0.0, rep.full_rank),
        LawResult("linearity_probe", rep.linearity_violation, 1e-9, rep.linearity_violation <= 1e-9),
        LawResult(
            "multiplicativity",
            rep.multiplicativity_defect,
            config.tol,
            rep.multiplicativity_defect <= config.tol,
        ),
        LawResult("unit_limit", rep.unit_limit.distance, limit, rep.unit_limit.passed),
        LawResult("pointwise_agreement", rep.pointwise_distance, limit, rep.pointwise_distance <= limit),
    ]
    return None, laws


def _subcritical_needed(direction: Direction, r: float) -> bool:
    return direction is Direction.CONTRACT and r <= 3.0


def _run_counterexample(config: ExperimentConfig) -> tuple[float | None, list[LawResult]]:
    g = cx.GajdaFunction(config.theta)
    worst = {level: 0.0 for level in cx.EnvelopeLevel}
    for i in range(config.samples):
        gen = substream(config.seed, i)
        x, y, z = (ENVELOPE_RANGE * (2.0 * gen.random() - 1.0) for _ in range(3))
        for level in cx.EnvelopeLevel:
            lhs, rhs = cx.check_envelope(g, level, x, y, z)
            worst[level] = max(worst[level], lhs - (rhs + ENVELOPE_SLACK))
    laws = [
        LawResult(f"envelope_{level.value}", max(0.0, excess), 0.0, excess <= 0.0)
        for level, excess in worst.items()
    ]

    series_gen = substream(config.seed, 1_000_000)
    series_excess = 0.0
    # the truncation tail sits below double resolution; allow a few ulp of
    # the bounded value 2*mu for the two evaluation routes to disagree
    rounding = 64.0 * np.finfo(float).eps * g.mu
    for _ in range(min(config.samples, 10_000)):
        x = ENVELOPE_RANGE * (2.0 * series_gen.random() - 1.0)
        value, tail = cx.eval_series(g, x)
        excess = abs(value - cx.eval_closed_form(g, x)) - (tail + rounding)
        series_excess = max(series_excess, excess)
    laws.append(LawResult("series_agreement", max(0.0, series_excess), 0.0, series_excess <= 0.0))

    regime = Regime(ControlForm.SUM, Direction.CONTRACT, 1.0, config.theta, allow_subcritical=True)
    probe = alg.element(alg.diagonal_algebra(1), [1.0])
    try:
        st.stabilize(cx.as_mapping(g), regime, probe, config.tol)
        diverged = False
    except DivergenceError:
        diverged = True
    laws.append(LawResult("divergence_detected", 0.0 if diverged else 1.0, 0.0, diverged))

    profile = cx.divergence_profile(g, 200)
    growth_break = sum(
        1 for a, b in zip(profile[4:], profile[5:]) if not b.s_m > a.s_m
    )
    laws.append(LawResult("growth_monotone_from_5", float(growth_break), 0.0, growth_break == 0))
    return None, laws


def _run_linearity(config: ExperimentConfig) -> tuple[float | None, list[LawResult]]:
    core = _exact_homomorphism(config.algebra, config.seed)
    rep = st.linearity_certificate(
        core, config.samples, config.tol, _derive_seed(config.seed, 22)
    )
    laws = [
        LawResult(name, value, config.tol, value <= config.tol)
        for name, value in rep.violations.items()
    ]
    return None, laws


_RUNNERS = {
    Scenario.AXIOMS: _run_axioms,
    Scenario.STABILITY_SUM_CONTRACT: _run_stability,
    Scenario.STABILITY_SUM_EXPAND: _run_stability,
    Scenario.STABILITY_PROD_CONTRACT: _run_stability,
    Scenario.STABILITY_PROD_EXPAND: _run_stability,
    Scenario.DERIVATION: _run_derivation,
    Scenario.ISOMORPHISM: _run_isomorphism,
    Scenario.COUNTEREXAMPLE: _run_counterexample,
    Scenario.LINEARITY: _run_linearity,
}


def run_scenario(config: ExperimentConfig) -> ExperimentReport:
    """Dispatch the config to its scenario and collect law results."""
    start = time.perf_counter()
    theta_eff, laws = _RUNNERS[config.scenario](config)
    elapsed = time.perf_counter() - start
    return ExperimentReport(config, theta_eff, tuple(laws), wall_clock_seconds=elapsed)
