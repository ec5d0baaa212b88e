"""Scenario runner: config loading, full pipeline execution, report emission.

Configs are single JSON files; complex numbers are always [re, im] pairs and
words are digit strings.  Reports are deterministic: two runs of the same
config bytes differ only in the timing section.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channels import apply_error_channel, apply_recovery_channel
from .cuntz import build_multiplet, check_cuntz_relations
from .gauge import (
    check_fidelity_gauge_invariance,
    check_S_covariance,
    gauge_element,
    gauge_transform_multiplet,
    second_quantize,
    transform_state,
)
from .recovery import (
    CodeSpace,
    InfeasibleRecoveryError,
    check_basis_transform,
    check_gauge_constraint,
    constraint_matrix,
    solve_recovery,
    transition_amplitudes,
    verify_recovery,
)
from .wordspace import (
    DEFAULT_DIM_CAP,
    DEFAULT_TOL,
    StateVector,
    build_word_basis,
    fidelity,
    make_state,
    parse_word,
    pure_density,
    word_dimension,
)

REPORT_SCHEMA_VERSION = 1

#: valid entries for the "checks" config list
CHECK_NAMES = (
    "cuntz",
    "recovery",
    "gauge_fidelity",
    "S_covariance",
    "constr3",
    "transfmatr",
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 2
EXIT_INFEASIBLE = 3
EXIT_CONFIG_ERROR = 4


class ConfigError(ValueError):
    """The scenario config violates the schema or its prerequisites."""


def _as_complex(value, where: str) -> complex:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value)
    ):
        raise ConfigError(f"{where}: complex numbers must be [re, im] pairs, got {value!r}")
    return complex(value[0], value[1])


def _pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _complex_matrix(value, rows: int, cols: int, where: str) -> np.ndarray:
    if not isinstance(value, list) or len(value) != rows:
        raise ConfigError(f"{where}: expected {rows} rows, got {value!r}")
    out = np.empty((rows, cols), dtype=np.complex128)
    for r, row in enumerate(value):
        if not isinstance(row, list) or len(row) != cols:
            raise ConfigError(f"{where}: row {r} must have {cols} entries")
        for c, entry in enumerate(row):
            out[r, c] = _as_complex(entry, f"{where}[{r}][{c}]")
    return out


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated scenario parameters; ``raw`` keeps the source dict for hashing."""

    d: int
    L: int
    code_terms: tuple[tuple[tuple[str, complex], ...], ...]
    M: int | str
    tolerance: float
    gauge: np.ndarray | None
    renormalize_channel: bool
    checks: tuple[str, ...]
    theta: np.ndarray | None
    raw: dict = field(compare=False, repr=False)

    @property
    def k(self) -> int:
        return len(self.code_terms)


def config_hash(raw: dict) -> str:
    canonical = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


_KNOWN_KEYS = {
    "d",
    "L",
    "code_basis",
    "M",
    "tolerance",
    "gauge",
    "renormalize_channel",
    "checks",
    "theta",
}


def parse_config(data: dict) -> ScenarioConfig:
    """Validate a parsed config dict; raises ConfigError on any violation."""
    if not isinstance(data, dict):
        raise ConfigError(f"config must be a JSON object, got {type(data).__name__}")
    unknown = set(data) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in ("d", "L", "code_basis"):
        if key not in data:
            raise ConfigError(f"config is missing required key {key!r}")

    d, L = data["d"], data["L"]
    for name, value in (("d", d), ("L", L)):
        if not isinstance(value, int) or isinstance(value, bool) or value < 1:
            raise ConfigError(f"{name} must be a positive integer, got {value!r}")
    if word_dimension(d, L) > DEFAULT_DIM_CAP:
        raise ConfigError(
            f"word-space dimension {word_dimension(d, L)} for (d={d}, L={L}) "
            f"exceeds the cap {DEFAULT_DIM_CAP}"
        )

    code_basis = data["code_basis"]
    if not isinstance(code_basis, list) or not code_basis:
        raise ConfigError("code_basis must be a nonempty list of states")
    code_terms = []
    for a, state_terms in enumerate(code_basis):
        if not isinstance(state_terms, list) or not state_terms:
            raise ConfigError(f"code_basis[{a}] must be a nonempty list of [word, [re, im]] terms")
        terms = []
        for t, term in enumerate(state_terms):
            if not isinstance(term, list) or len(term) != 2 or not isinstance(term[0], str):
                raise ConfigError(
                    f"code_basis[{a}][{t}] must be a [word, [re, im]] pair, got {term!r}"
                )
            try:
                word = parse_word(term[0])
            except ValueError as exc:
                raise ConfigError(f"code_basis[{a}][{t}]: {exc}") from None
            if any(c > d for c in word):
                raise ConfigError(
                    f"code_basis[{a}][{t}]: word {term[0]!r} uses letters above d={d}"
                )
            if len(word) > L:
                raise ConfigError(
                    f"code_basis[{a}][{t}]: word {term[0]!r} is longer than L={L}"
                )
            terms.append((term[0], _as_complex(term[1], f"code_basis[{a}][{t}]")))
        code_terms.append(tuple(terms))

    M = data.get("M", "auto")
    if M != "auto" and (not isinstance(M, int) or isinstance(M, bool) or M < 1):
        raise ConfigError(f'M must be a positive integer or "auto", got {M!r}')

    tolerance = data.get("tolerance", DEFAULT_TOL)
    if not isinstance(tolerance, (int, float)) or isinstance(tolerance, bool) or tolerance <= 0:
        raise ConfigError(f"tolerance must be a positive number, got {tolerance!r}")

    renormalize = data.get("renormalize_channel", False)
    if not isinstance(renormalize, bool):
        raise ConfigError(f"renormalize_channel must be a boolean, got {renormalize!r}")

    checks = data.get("checks", [])
    if not isinstance(checks, list) or not all(isinstance(c, str) for c in checks):
        raise ConfigError("checks must be a list of check names")
    seen = set()
    for c in checks:
        if c not in CHECK_NAMES:
            raise ConfigError(f"unknown check {c!r}; valid checks: {list(CHECK_NAMES)}")
        if c in seen:
            raise ConfigError(f"check {c!r} listed more than once")
        seen.add(c)

    gauge = None
    if data.get("gauge") is not None:
        gauge = _complex_matrix(data["gauge"], d, d, "gauge")
        try:
            gauge_element(gauge)
        except ValueError as exc:
            raise ConfigError(f"gauge: {exc}") from None

    theta = None
    if data.get("theta") is not None:
        theta = _complex_matrix(data["theta"], len(code_terms), len(code_terms), "theta")

    for check, needs in (("gauge_fidelity", "gauge"), ("S_covariance", "gauge"), ("transfmatr", "theta")):
        if check in seen and data.get(needs) is None:
            raise ConfigError(f"check {check!r} requires the {needs!r} config field")
    for check in ("S_covariance", "constr3"):
        if check in seen and L < d:
            raise ConfigError(f"check {check!r} needs L >= d, got d={d}, L={L}")

    return ScenarioConfig(
        d=d,
        L=L,
        code_terms=tuple(code_terms),
        M=M,
        tolerance=float(tolerance),
        gauge=gauge,
        renormalize_channel=renormalize,
        checks=tuple(checks),
        theta=theta,
        raw=data,
    )


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return parse_config(data)


@dataclass(frozen=True)
class ScenarioReport:
    """Full machine-readable record of one scenario run."""

    schema_version: int
    config_hash: str
    scenario: dict
    solver: dict
    states: list
    checks: dict
    status: str
    exit_code: int
    timing: dict

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "config_hash": self.config_hash,
            "scenario": self.scenario,
            "solver": self.solver,
            "states": self.states,
            "checks": self.checks,
            "status": self.status,
            "exit_code": self.exit_code,
            "timing": self.timing,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioReport":
        if data.get("schema_version") != REPORT_SCHEMA_VERSION:
            raise ValueError(
                f"unsupported report schema version {data.get('schema_version')!r}"
            )
        return cls(**{k: data[k] for k in (
            "schema_version",
            "config_hash",
            "scenario",
            "solver",
            "states",
            "checks",
            "status",
            "exit_code",
            "timing",
        )})


def _float_list(values) -> list[float]:
    return [float(v) for v in np.asarray(values).ravel()]


def _build_code(config: ScenarioConfig, basis) -> CodeSpace:
    states = []
    for a, terms in enumerate(config.code_terms):
        try:
            states.append(make_state(basis, terms, normalize=True))
        except ValueError as exc:
            raise ConfigError(f"code_basis[{a}]: {exc}") from None
    try:
        return CodeSpace(basis_states=tuple(states))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def run_scenario(config: ScenarioConfig) -> ScenarioReport:
    """Execute the full pipeline for one validated config.

    Builds the representation, solves the recovery system, pushes every code
    state through error and recovery channels, and runs the requested
    checks.  The report is deterministic apart from the timing section.
    """
    t0 = time.perf_counter()
    basis = build_word_basis(config.d, config.L)
    multiplet = build_multiplet(basis)
    code = _build_code(config, basis)
    tol = config.tolerance

    checks: dict[str, dict] = {}

    if "cuntz" in config.checks:
        rep = check_cuntz_relations(multiplet, tol=tol)
        checks["cuntz"] = {
            "passed": rep.passed,
            "witness": {
                "isometry_defect": rep.isometry_defect,
                "completeness_defect": rep.completeness_defect,
            },
        }

    infeasible = None
    plan = None
    try:
        plan = solve_recovery(multiplet, code, M=config.M)
    except InfeasibleRecoveryError as exc:
        infeasible = exc

    if plan is not None:
        table = transition_amplitudes(multiplet, code)
        solver = {
            "status": "feasible",
            "M": plan.M,
            "residual": float(plan.residual),
            "y": _float_list(plan.y),
            "alpha": [_float_list(row) for row in plan.alpha],
            "equation_residuals": _float_list(
                np.abs(constraint_matrix(table) @ plan.y - 1.0)
            ),
        }
    else:
        solver = {
            "status": "infeasible",
            "M": None,
            "residual": infeasible.residual,
            "y": _float_list(infeasible.y),
            "alpha": None,
            "equation_residuals": _float_list(infeasible.equation_residuals),
            "failing_equations": infeasible.failing_equations,
        }

    states = []
    rho_errors = []
    for a, state in enumerate(code.basis_states):
        rho_i = pure_density(state)
        rho_f = apply_error_channel(
            multiplet, rho_i, renormalize=config.renormalize_channel
        )
        rho_errors.append(rho_f)
        entry = {
            "index": a,
            "trace_initial": rho_i.trace,
            "trace_error": rho_f.trace,
            "fidelity_before": fidelity(state, rho_f, tol=tol),
            "trace_recovered": None,
            "fidelity_after": None,
        }
        if plan is not None:
            rho_r = apply_recovery_channel(plan, rho_f)
            entry["trace_recovered"] = rho_r.trace
            entry["fidelity_after"] = fidelity(state, rho_r, tol=tol)
        states.append(entry)

    if "gauge_fidelity" in config.checks:
        g = gauge_element(config.gauge)
        gamma = second_quantize(g, basis)
        diffs = [
            check_fidelity_gauge_invariance(state, rho_f, gamma, tol=tol).difference
            for state, rho_f in zip(code.basis_states, rho_errors)
        ]
        transformed = gauge_transform_multiplet(gamma, multiplet)
        code_t = CodeSpace(
            basis_states=tuple(transform_state(gamma, s) for s in code.basis_states)
        )
        c_orig = constraint_matrix(transition_amplitudes(multiplet, code))
        c_trans = constraint_matrix(transition_amplitudes(transformed, code_t))
        matrix_diff = float(np.max(np.abs(c_orig - c_trans)))
        max_diff = max(diffs)
        checks["gauge_fidelity"] = {
            "passed": max_diff <= tol and matrix_diff <= tol,
            "witness": {
                "max_fidelity_difference": float(max_diff),
                "max_constraint_matrix_difference": matrix_diff,
            },
        }

    if "S_covariance" in config.checks:
        g = gauge_element(config.gauge)
        rep = check_S_covariance(multiplet, g, tol=tol)
        checks["S_covariance"] = {
            "passed": rep.passed,
            "witness": {
                "covariance_defect": rep.defect,
                "gauge_determinant": _pair(rep.det_U),
            },
        }

    if "transfmatr" in config.checks:
        amps = np.array([s.amplitudes for s in code.basis_states])
        new_amps = np.asarray(config.theta) @ amps
        try:
            new_basis = CodeSpace(
                basis_states=tuple(
                    StateVector(basis=basis, amplitudes=row, normalized=True)
                    for row in new_amps
                )
            )
        except ValueError as exc:
            raise ConfigError(f"theta does not produce a valid code basis: {exc}") from None
        rep = check_basis_transform(config.theta, multiplet, new_basis, tol=tol)
        checks["transfmatr"] = {
            "passed": rep.passed,
            "witness": {
                "per_index_max_error": rep.max_per_index_error,
                "summed_max_error": rep.max_summed_error,
            },
        }

    if "recovery" in config.checks:
        if plan is None:
            checks["recovery"] = {"passed": None, "witness": {"reason": "solver infeasible"}}
        else:
            rep = verify_recovery(plan, multiplet, code, tol=tol)
            checks["recovery"] = {
                "passed": rep.passed,
                "witness": {
                    "max_fidelity_error": max(r.fidelity_error for r in rep.records),
                    "max_agreement_error": max(r.agreement_error for r in rep.records),
                },
            }

    if "constr3" in config.checks:
        if plan is None:
            checks["constr3"] = {"passed": None, "witness": {"reason": "solver infeasible"}}
        else:
            results = [
                check_gauge_constraint(plan, multiplet, state, tol=tol)
                for state in code.basis_states
            ]
            checks["constr3"] = {
                "passed": all(r.passed for r in results),
                "witness": {
                    "values": [r.value for r in results],
                    "max_distance_from_one": max(abs(r.value - 1.0) for r in results),
                    "support_exact": [r.support_exact for r in results],
                },
            }

    ran = [entry for entry in checks.values() if entry["passed"] is not None]
    if infeasible is not None:
        status, exit_code = "infeasible", EXIT_INFEASIBLE
    elif any(not entry["passed"] for entry in ran):
        status, exit_code = "check_failed", EXIT_CHECK_FAILED
    else:
        status, exit_code = "pass", EXIT_OK

    return ScenarioReport(
        schema_version=REPORT_SCHEMA_VERSION,
        config_hash=config_hash(config.raw),
        scenario={
            "d": config.d,
            "L": config.L,
            "k": config.k,
            "M": config.M,
            "tolerance": config.tolerance,
            "renormalize_channel": config.renormalize_channel,
            "checks": list(config.checks),
        },
        solver=solver,
        states=states,
        checks=checks,
        status=status,
        exit_code=exit_code,
        timing={"total_seconds": time.perf_counter() - t0},
    )


def render_machine(report: ScenarioReport) -> str:
    return json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"


def render_text(report: ScenarioReport) -> str:
    """Fixed-layout human-readable summary, one line per check."""
    lines = []
    s = report.scenario
    lines.append(
        f"scenario   d={s['d']} L={s['L']} k={s['k']} M={s['M']} tolerance={s['tolerance']!r}"
    )
    lines.append(f"config     sha256={report.config_hash}")
    sol = report.solver
    lines.append(f"solver     status={sol['status']} residual={sol['residual']!r}")
    lines.append(f"           y={sol['y']!r}")
    if sol["alpha"] is not None:
        for a, row in enumerate(sol["alpha"]):
            lines.append(f"           alpha[{a}]={row!r}")
    for entry in report.states:
        lines.append(
            f"state {entry['index']:<4} fidelity_before={entry['fidelity_before']!r} "
            f"fidelity_after={entry['fidelity_after']!r} "
            f"trace_error={entry['trace_error']!r} "
            f"trace_recovered={entry['trace_recovered']!r}"
        )
    for name in sorted(report.checks):
        entry = report.checks[name]
        if entry["passed"] is None:
            token = "NOT-RUN"
        else:
            token = "PASS" if entry["passed"] else "FAIL"
        witness = " ".join(f"{k}={v!r}" for k, v in sorted(entry["witness"].items()))
        lines.append(f"check {name:<17} {token} {witness}")
    lines.append(f"result     {report.status.upper()} exit_code={report.exit_code}")
    return "\n".join(lines) + "\n"


def emit_report(report: ScenarioReport, path=None, format: str = "machine") -> str:
    """Render the report; when a path is given, write it atomically."""
    if format == "machine":
        text = render_machine(report)
    elif format == "text":
        text = render_text(report)
    else:
        raise ValueError(f"unknown report format {format!r}")
    if path is not None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(text)
            os.replace(tmp, path)
        except BaseException:
            os.unlink(tmp)
            raise
    return text


def parse_report(text: str) -> ScenarioReport:
    """Inverse of the machine format: parse an emitted report back."""
    return ScenarioReport.from_dict(json.loads(text))
