"""Compact gauge-group action on the multiplet and its word-space representation.

A gauge element is a d x d unitary acting on the letter index.  Its
second-quantized form is block diagonal over word lengths, with the level-n
block the n-fold tensor power of the unitary; conjugating a generator by it
rotates the generator index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cuntz import FieldOperator, GaugeMultiplet, build_isometry_S
from .wordspace import (
    DEFAULT_TOL,
    DensityMatrix,
    StateVector,
    WordBasis,
    _require_same_basis,
    word_dimension,
)

#: unitarity tolerance for gauge elements
UNITARITY_TOL = 1e-10


@dataclass(frozen=True)
class GaugeElement:
    """A d x d unitary on the multiplet index, with its determinant."""

    U: np.ndarray
    det_U: complex


def gauge_element(U, tol: float = UNITARITY_TOL) -> GaugeElement:
    """Validate and wrap a d x d unitary matrix."""
    U = np.array(U, dtype=np.complex128)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValueError(f"gauge element must be a square matrix, got shape {U.shape}")
    defect = float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))
    if defect > tol:
        raise ValueError(f"matrix is not unitary: max |U*U - 1| = {defect:.3e}")
    U.flags.writeable = False
    return GaugeElement(U=U, det_U=complex(np.linalg.det(U)))


@dataclass(frozen=True)
class GammaRep:
    """Word-space unitary implementing a gauge element, block diagonal in length."""

    basis: WordBasis
    element: GaugeElement
    matrix: np.ndarray


def second_quantize(g: GaugeElement, basis: WordBasis) -> GammaRep:
    """Assemble the block-diagonal tensor-power representation of g.

    Level n acts as the n-fold tensor power of U; level 0 is the scalar 1.
    Because words of a given length are ordered lexicographically, the level
    block is literally the iterated Kronecker power.
    """
    if g.U.shape != (basis.d, basis.d):
        raise ValueError(
            f"gauge element is {g.U.shape[0]}x{g.U.shape[1]} but the basis has d={basis.d}"
        )
    gamma = np.zeros((basis.dim, basis.dim), dtype=np.complex128)
    gamma[0, 0] = 1.0
    block = np.eye(1, dtype=np.complex128)
    for n in range(1, basis.L + 1):
        block = np.kron(block, g.U)
        start = word_dimension(basis.d, n - 1)
        stop = start + basis.d**n
        gamma[start:stop, start:stop] = block
    gamma.flags.writeable = False
    return GammaRep(basis=basis, element=g, matrix=gamma)


def transform_state(gamma: GammaRep, psi: StateVector) -> StateVector:
    _require_same_basis(gamma.basis, psi.basis)
    return StateVector(
        basis=psi.basis,
        amplitudes=gamma.matrix @ psi.amplitudes,
        normalized=psi.normalized,
    )


def transform_density(gamma: GammaRep, rho: DensityMatrix) -> DensityMatrix:
    _require_same_basis(gamma.basis, rho.basis)
    return DensityMatrix(
        basis=rho.basis,
        matrix=gamma.matrix @ rho.matrix @ gamma.matrix.conj().T,
    )


def gauge_transform_multiplet(gamma: GammaRep, m: GaugeMultiplet) -> GaugeMultiplet:
    """Conjugate every generator by the word-space unitary.

    The transformed multiplet satisfies the same truncated relations exactly,
    since conjugation by a block-diagonal unitary fixes both the vacuum
    projector and the length-<= L-1 projector.
    """
    _require_same_basis(gamma.basis, m.basis)
    gdag = gamma.matrix.conj().T
    generators = tuple(
        FieldOperator(
            basis=m.basis,
            matrix=gamma.matrix @ g.matrix @ gdag,
            safe_len=g.safe_len,
            growth=g.growth,
        )
        for g in m.generators
    )
    return GaugeMultiplet(basis=m.basis, generators=generators)


@dataclass(frozen=True)
class FidelityInvarianceReport:
    original: float
    transformed: float
    difference: float
    tol: float
    passed: bool


def check_fidelity_gauge_invariance(
    phi: StateVector, rho: DensityMatrix, gamma: GammaRep, tol: float = DEFAULT_TOL
) -> FidelityInvarianceReport:
    """Compare <phi|rho|phi> before and after the gauge action on both arguments."""
    from .wordspace import fidelity

    original = fidelity(phi, rho, tol=tol)
    transformed = fidelity(transform_state(gamma, phi), transform_density(gamma, rho), tol=tol)
    difference = abs(transformed - original)
    return FidelityInvarianceReport(
        original=original,
        transformed=transformed,
        difference=difference,
        tol=tol,
        passed=difference <= tol,
    )


@dataclass(frozen=True)
class SCovarianceReport:
    defect: float
    det_U: complex
    tol: float
    passed: bool


def check_S_covariance(
    m: GaugeMultiplet, g: GaugeElement, tol: float = DEFAULT_TOL
) -> SCovarianceReport:
    """Check that the antisymmetrized isometry rotates by det(U).

    Builds S from the multiplet and S' from the gauge-transformed multiplet
    and measures max |S' - det(U) S| on columns of words short enough for
    the degree-d product to act exactly (length <= L-d).  For det(U) = 1 the
    isometry is gauge invariant.
    """
    gamma = second_quantize(g, m.basis)
    s = build_isometry_S(m)
    s_prime = build_isometry_S(gauge_transform_multiplet(gamma, m))
    safe_cols = m.basis.lengths <= m.basis.L - m.d
    diff = s_prime.matrix[:, safe_cols] - g.det_U * s.matrix[:, safe_cols]
    defect = float(np.max(np.abs(diff))) if diff.size else 0.0
    return SCovarianceReport(
        defect=defect, det_U=g.det_U, tol=tol, passed=defect <= tol
    )
