"""Kraus-style superoperator maps: error, projection, recovery, isometry."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .cuntz import FieldOperator, GaugeMultiplet
from .wordspace import DensityMatrix, _require_same_basis

if TYPE_CHECKING:
    from .recovery import RecoveryPlan

CHANNEL_LABELS = ("error", "projection", "recovery", "isometry")


@dataclass(frozen=True)
class Superoperator:
    """A map rho -> sum_k K_k rho adjoint(K_k) given by its Kraus terms."""

    kraus_terms: tuple[FieldOperator, ...]
    label: str

    def __post_init__(self):
        if self.label not in CHANNEL_LABELS:
            raise ValueError(f"unknown channel label {self.label!r}")
        if not self.kraus_terms:
            raise ValueError("superoperator needs at least one Kraus term")
        basis = self.kraus_terms[0].basis
        for term in self.kraus_terms[1:]:
            _require_same_basis(basis, term.basis)

    @property
    def basis(self):
        return self.kraus_terms[0].basis

    def apply(self, rho: DensityMatrix) -> DensityMatrix:
        _require_same_basis(self.basis, rho.basis)
        out = np.zeros_like(rho.matrix)
        for term in self.kraus_terms:
            out += term.matrix @ rho.matrix @ term.matrix.conj().T
        return DensityMatrix(basis=rho.basis, matrix=out)


def error_superoperator(m: GaugeMultiplet) -> Superoperator:
    return Superoperator(kraus_terms=tuple(m.generators), label="error")


def projection_superoperator(projectors) -> Superoperator:
    return Superoperator(kraus_terms=tuple(projectors), label="projection")


def recovery_superoperator(plan: "RecoveryPlan") -> Superoperator:
    return Superoperator(kraus_terms=tuple(plan.operators), label="recovery")


def isometry_superoperator(S: FieldOperator) -> Superoperator:
    return Superoperator(kraus_terms=(S,), label="isometry")


def apply_error_channel(
    m: GaugeMultiplet, rho: DensityMatrix, renormalize: bool = False
) -> DensityMatrix:
    """Error state sum_i G_i rho adjoint(G_i).

    The map is not trace preserving: on input supported on words of length
    <= L-1 the trace scales by d.  ``renormalize`` divides the output by its
    trace after the fact; it is off by default because the recovery
    arithmetic relies on the unnormalized convention.
    """
    out = error_superoperator(m).apply(rho)
    if renormalize:
        trace = out.trace
        if abs(trace) > 0.0:
            out = DensityMatrix(basis=out.basis, matrix=out.matrix / trace)
    return out


def apply_projection_channel(projectors, rho: DensityMatrix) -> DensityMatrix:
    """Pinching map sum_i P_i rho P_i; idempotent, fixes any error state."""
    return projection_superoperator(projectors).apply(rho)


def apply_recovery_channel(plan: "RecoveryPlan", rho: DensityMatrix) -> DensityMatrix:
    """Recovered state sum_a R_a rho adjoint(R_a)."""
    return recovery_superoperator(plan).apply(rho)


def apply_isometry_channel(S: FieldOperator, rho: DensityMatrix) -> DensityMatrix:
    """Single-term map S rho adjoint(S); trace preserving on S's safe domain."""
    return isometry_superoperator(S).apply(rho)
