"""Recovery-operator synthesis from projector combinations, with verification.

The recovery operators are R_a = sum_i alpha[a, i] P_i with real nonnegative
coefficients (free phases are fixed to zero).  Feasibility reduces to a
nonnegative linear system in the column sums y_i = sum_a alpha[a, i]^2:
C y = 1 with C[A, i] = |<e_A|G_i|e_A>|^2, solved by nonnegative least
squares and refined to the minimum-norm nonnegative solution when the
system is underdetermined.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

from .channels import apply_error_channel, apply_recovery_channel
from .cuntz import (
    DEFAULT_PERMUTATION_CAP,
    FieldOperator,
    GaugeMultiplet,
    build_projectors,
    permutation_sign,
)
from .wordspace import (
    DEFAULT_TOL,
    StateVector,
    _require_same_basis,
    fidelity,
    pure_density,
)

#: nonnegative least-squares residual below this declares the system feasible
FEASIBILITY_TOL = 1e-8
#: support enumeration for the min-norm refinement is exponential in d
MIN_NORM_SUPPORT_CAP = 12


@dataclass(frozen=True)
class CodeSpace:
    """Orthonormal basis states spanning the subspace to be recovered.

    Every state must be supported on words of length <= L-1 so that a single
    generator application stays exact.
    """

    basis_states: tuple[StateVector, ...]

    def __post_init__(self):
        if not self.basis_states:
            raise ValueError("code space needs at least one basis state")
        basis = self.basis_states[0].basis
        for state in self.basis_states[1:]:
            _require_same_basis(basis, state.basis)
        amps = np.array([s.amplitudes for s in self.basis_states])
        gram = amps.conj() @ amps.T
        defect = float(np.max(np.abs(gram - np.eye(self.k))))
        if defect > DEFAULT_TOL:
            raise ValueError(
                f"code basis is not orthonormal: max |Gram - 1| = {defect:.3e}"
            )
        for a, state in enumerate(self.basis_states):
            if state.support_length() > basis.L - 1:
                raise ValueError(
                    f"code state {a} has support on words of length {state.support_length()}, "
                    f"which leaves the exact domain (length <= {basis.L - 1})"
                )

    @property
    def k(self) -> int:
        return len(self.basis_states)

    @property
    def basis(self):
        return self.basis_states[0].basis


@dataclass(frozen=True)
class AmplitudeTable:
    """Generator expectations <e_A|G_i|e_A>, one row per code state."""

    entries: np.ndarray

    @property
    def k(self) -> int:
        return self.entries.shape[0]

    @property
    def d(self) -> int:
        return self.entries.shape[1]


def transition_amplitudes(m: GaugeMultiplet, code: CodeSpace) -> AmplitudeTable:
    """Tabulate <e_A|G_i|e_A> for every code state and generator."""
    _require_same_basis(m.basis, code.basis)
    entries = np.empty((code.k, m.d), dtype=np.complex128)
    for a, state in enumerate(code.basis_states):
        for i, g in enumerate(m.generators):
            entries[a, i] = np.vdot(state.amplitudes, g.matrix @ state.amplitudes)
    entries.flags.writeable = False
    return AmplitudeTable(entries=entries)


def cross_amplitudes(m: GaugeMultiplet, states) -> np.ndarray:
    """Off-diagonal table <f_C|G_i|f_D>, shape (d, n, n)."""
    states = tuple(states)
    amps = np.array([s.amplitudes for s in states])
    out = np.empty((m.d, len(states), len(states)), dtype=np.complex128)
    for i, g in enumerate(m.generators):
        out[i] = amps.conj() @ g.matrix @ amps.T
    return out


def constraint_matrix(table: AmplitudeTable) -> np.ndarray:
    """Real k x d matrix of squared moduli |<e_A|G_i|e_A>|^2."""
    return np.abs(table.entries) ** 2


class InfeasibleRecoveryError(ValueError):
    """The nonnegative constraint system has no solution within tolerance."""

    def __init__(self, residual, equation_residuals, y, tol):
        self.residual = float(residual)
        self.equation_residuals = np.asarray(equation_residuals, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self.tol = float(tol)
        self.failing_equations = [
            int(a) for a in np.nonzero(self.equation_residuals > tol)[0]
        ]
        super().__init__(
            "recovery constraint system is infeasible: residual "
            f"{self.residual:.3e} > {tol:.1e}; failing equations "
            f"{self.failing_equations} with per-equation residuals "
            f"{[float(r) for r in self.equation_residuals]}"
        )


@dataclass(frozen=True)
class RecoveryPlan:
    """Coefficients and assembled operators of a recovery family.

    ``y`` holds the column sums sum_a alpha[a, i]^2, the actual solver
    unknowns; ``residual`` is the final 2-norm constraint residual.
    """

    M: int
    alpha: np.ndarray
    operators: tuple[FieldOperator, ...]
    y: np.ndarray
    residual: float


def assemble_plan(
    m: GaugeMultiplet, alpha, residual: float = float("nan")
) -> RecoveryPlan:
    """Build the operators R_a = sum_i alpha[a, i] P_i for a coefficient matrix."""
    alpha = np.array(alpha, dtype=float)
    if alpha.ndim != 2 or alpha.shape[1] != m.d:
        raise ValueError(
            f"alpha must have shape (M, {m.d}), got {alpha.shape}"
        )
    if np.any(alpha < 0):
        raise ValueError("alpha entries must be nonnegative (phases are fixed to zero)")
    projectors = build_projectors(m)
    operators = []
    for row in alpha:
        mat = np.zeros((m.basis.dim, m.basis.dim), dtype=np.complex128)
        for coeff, p in zip(row, projectors):
            mat += coeff * p.matrix
        mat.flags.writeable = False
        operators.append(
            FieldOperator(basis=m.basis, matrix=mat, safe_len=m.basis.L, growth=0)
        )
    alpha.flags.writeable = False
    y = (alpha**2).sum(axis=0)
    y.flags.writeable = False
    return RecoveryPlan(
        M=alpha.shape[0],
        alpha=alpha,
        operators=tuple(operators),
        y=y,
        residual=float(residual),
    )


def _min_norm_nonneg(C: np.ndarray, b: np.ndarray, tol: float) -> np.ndarray | None:
    """Minimum-2-norm nonnegative solution of C y = b by support enumeration.

    The optimum restricted to its own support is the plain least-norm
    solution there, so scanning all supports and keeping the feasible
    candidate of smallest norm is exact.  Returns None if no support yields
    a nonnegative solution within tolerance.
    """
    k, d = C.shape
    best = None
    best_norm = np.inf
    for size in range(1, d + 1):
        for support in itertools.combinations(range(d), size):
            sub = C[:, support]
            y_sub, *_ = np.linalg.lstsq(sub, b, rcond=None)
            if np.any(y_sub < -1e-12):
                continue
            y = np.zeros(d)
            y[list(support)] = np.clip(y_sub, 0.0, None)
            if float(np.linalg.norm(C @ y - b)) > tol:
                continue
            norm = float(np.linalg.norm(y))
            if norm < best_norm - 1e-15:
                best = y
                best_norm = norm
    return best


def solve_recovery(
    m: GaugeMultiplet,
    code: CodeSpace,
    M: int | str = "auto",
    tol: float = FEASIBILITY_TOL,
) -> RecoveryPlan:
    """Solve for nonnegative coefficients recovering every code basis state.

    The constraints only see the column sums y_i, so the solve is a
    nonnegative least-squares problem C y = 1; a residual above ``tol``
    raises InfeasibleRecoveryError naming the failing equations.  The
    feasible y is refined to the minimum-norm nonnegative solution (unique,
    hence deterministic) and split uniformly across the M operators:
    alpha[a, i] = sqrt(y_i / M).
    """
    if M == "auto":
        m_count = code.k
    else:
        if not isinstance(M, int) or isinstance(M, bool) or M < 1:
            raise ValueError(f'M must be a positive integer or "auto", got {M!r}')
        m_count = M
    table = transition_amplitudes(m, code)
    C = constraint_matrix(table)
    b = np.ones(code.k)
    y, residual = nnls(C, b)
    if residual > tol:
        raise InfeasibleRecoveryError(
            residual=residual,
            equation_residuals=np.abs(C @ y - b),
            y=y,
            tol=tol,
        )
    if m.d <= MIN_NORM_SUPPORT_CAP:
        refined = _min_norm_nonneg(C, b, tol)
        if refined is not None:
            y = refined
    residual = float(np.linalg.norm(C @ y - b))
    alpha = np.sqrt(np.tile(y / m_count, (m_count, 1)))
    return assemble_plan(m, alpha, residual=residual)


@dataclass(frozen=True)
class StateFidelityRecord:
    index: int
    matrix_fidelity: float
    closed_form_fidelity: float
    fidelity_error: float
    agreement_error: float


@dataclass(frozen=True)
class RecoveryVerification:
    records: tuple[StateFidelityRecord, ...]
    tol: float
    passed: bool


def verify_recovery(
    plan: RecoveryPlan,
    m: GaugeMultiplet,
    code: CodeSpace,
    tol: float = DEFAULT_TOL,
) -> RecoveryVerification:
    """Run the full error-then-recovery pipeline on every code basis state.

    Checks that the recovered fidelity <e_A| R(E(|e_A><e_A|)) |e_A> is 1 and
    that it matches the closed form sum_a sum_i alpha[a, i]^2 |<e_A|G_i|e_A>|^2.
    """
    table = transition_amplitudes(m, code)
    x = plan.alpha**2
    records = []
    for a, state in enumerate(code.basis_states):
        rho_f = apply_error_channel(m, pure_density(state))
        rho_r = apply_recovery_channel(plan, rho_f)
        matrix_fid = fidelity(state, rho_r, tol=tol)
        closed_form = float(np.sum(x * (np.abs(table.entries[a]) ** 2)))
        records.append(
            StateFidelityRecord(
                index=a,
                matrix_fidelity=matrix_fid,
                closed_form_fidelity=closed_form,
                fidelity_error=abs(matrix_fid - 1.0),
                agreement_error=abs(matrix_fid - closed_form),
            )
        )
    passed = all(
        r.fidelity_error <= tol and r.agreement_error <= tol for r in records
    )
    return RecoveryVerification(records=tuple(records), tol=tol, passed=passed)


@dataclass(frozen=True)
class GaugeConstraintResult:
    value: float
    imaginary_part: float
    support_exact: bool
    tol: float
    passed: bool


def check_gauge_constraint(
    plan: RecoveryPlan,
    m: GaugeMultiplet,
    phi: StateVector,
    tol: float = DEFAULT_TOL,
    max_permutation_d: int = DEFAULT_PERMUTATION_CAP,
) -> GaugeConstraintResult:
    """Evaluate the antisymmetrized degree-d coefficient constraint at phi.

    Computes, verbatim,

        sum_a sum_{q,r} (1/d!) sign(q) sign(r) alpha[a, q(1)] conj(alpha[a, r(1)])
            * <G_{q(1)} ... G_{q(d)}> * <adjoint(G_{r(d)}) ... adjoint(G_{r(1)})>

    with expectations taken in phi, and passes iff the value is 1 within
    tolerance.  Only the first permutation slot enters the coefficients.
    Expectations are exact when phi is supported on words of length <= L-d;
    ``support_exact`` records whether that held.
    """
    _require_same_basis(m.basis, phi.basis)
    d, L = m.d, m.basis.L
    if L < d:
        raise ValueError(f"degree-{d} products need L >= d, got L={L}")
    if d > max_permutation_d:
        raise ValueError(
            f"permutation sum over d={d} letters exceeds the cap {max_permutation_d}"
        )
    perms = list(itertools.permutations(range(d)))
    signs = {q: permutation_sign(q) for q in perms}
    forward = {}
    backward = {}
    for q in perms:
        vec = phi.amplitudes
        for letter in reversed(q):
            vec = m.generators[letter].matrix @ vec
        forward[q] = complex(np.vdot(phi.amplitudes, vec))
        vec = phi.amplitudes
        for letter in q:
            vec = m.generators[letter].matrix.conj().T @ vec
        backward[q] = complex(np.vdot(phi.amplitudes, vec))
    scale = 1.0 / math.factorial(d)
    value = 0.0 + 0.0j
    for a in range(plan.M):
        for q in perms:
            for r in perms:
                value += (
                    scale
                    * signs[q]
                    * signs[r]
                    * plan.alpha[a, q[0]]
                    * np.conj(plan.alpha[a, r[0]])
                    * forward[q]
                    * backward[r]
                )
    support_exact = phi.support_length() <= L - d
    return GaugeConstraintResult(
        value=float(value.real),
        imaginary_part=float(value.imag),
        support_exact=support_exact,
        tol=tol,
        passed=abs(value - 1.0) <= tol,
    )


@dataclass(frozen=True)
class BasisTransformReport:
    """Row-sum values of the basis-change compatibility condition.

    ``per_index`` holds v(B, i) = sum_C |theta[B, C]|^2
    + sum_{C != D} conj(theta[B, C]) theta[B, D] |<f_C|G_i|f_D>| for each
    generator index i separately; ``index_summed`` sums the cross-term
    moduli over i instead.  The pass verdict uses the per-index variant;
    both are reported.
    """

    per_index: np.ndarray
    index_summed: np.ndarray
    max_per_index_error: float
    max_summed_error: float
    tol: float
    passed: bool


def check_basis_transform(
    theta,
    m: GaugeMultiplet,
    new_basis: CodeSpace,
    tol: float = DEFAULT_TOL,
) -> BasisTransformReport:
    """Test whether a basis change theta preserves the unit row-sum condition."""
    theta = np.array(theta, dtype=np.complex128)
    n = new_basis.k
    if theta.shape != (n, n):
        raise ValueError(
            f"theta must be {n}x{n} to match the {n} transformed basis states, "
            f"got shape {theta.shape}"
        )
    _require_same_basis(m.basis, new_basis.basis)
    cross = cross_amplitudes(m, new_basis.basis_states)
    moduli = np.abs(cross)
    diag_term = np.sum(np.abs(theta) ** 2, axis=1)
    per_index = np.empty((n, m.d), dtype=np.complex128)
    index_summed = np.empty(n, dtype=np.complex128)
    off = ~np.eye(n, dtype=bool)
    for b in range(n):
        pair = np.outer(theta[b].conj(), theta[b])
        for i in range(m.d):
            per_index[b, i] = diag_term[b] + np.sum(pair[off] * moduli[i][off])
        index_summed[b] = diag_term[b] + np.sum(pair[off] * moduli.sum(axis=0)[off])
    max_per_index_error = float(np.max(np.abs(per_index - 1.0)))
    max_summed_error = float(np.max(np.abs(index_summed - 1.0)))
    return BasisTransformReport(
        per_index=per_index,
        index_summed=index_summed,
        max_per_index_error=max_per_index_error,
        max_summed_error=max_summed_error,
        tol=tol,
        passed=max_per_index_error <= tol,
    )
