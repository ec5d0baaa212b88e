"""Truncated Cuntz generators and the algebraic objects built from them.

Each generator acts as a prefix shift on the word space: letter i maps |w>
to |iw> for |w| <= L-1 and kills the top level |w| = L.  On that truncated
space the defining relations hold exactly away from the vacuum
(completeness) and the top level (isometry); every operator carries
``safe_len`` metadata recording where its identities are exact.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .wordspace import (
    DEFAULT_TOL,
    WordBasis,
    _require_same_basis,
    length_projector,
    vacuum_projector,
)

#: antisymmetrized products enumerate d! permutations; refuse beyond this
DEFAULT_PERMUTATION_CAP = 6


def permutation_sign(perm) -> int:
    """Sign of a permutation (tuple of distinct comparables) by transposition parity."""
    perm = tuple(perm)
    sign = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


@dataclass(frozen=True)
class FieldOperator:
    """Dense operator on the word space with safe-domain metadata.

    ``safe_len`` is the longest input word length on which the operator's
    defining relations are exact; beyond it, top-level truncation can
    interfere.  ``growth`` bounds how much the operator can lengthen a word
    and is what propagates ``safe_len`` through products: a product of p
    generators ends up with safe_len = L - p.
    """

    basis: WordBasis
    matrix: np.ndarray
    safe_len: int
    growth: int = 0

    @property
    def dim(self) -> int:
        return self.basis.dim

    def dagger(self) -> FieldOperator:
        return FieldOperator(
            basis=self.basis,
            matrix=self.matrix.conj().T.copy(),
            safe_len=self.safe_len,
            growth=-self.growth,
        )

    def __matmul__(self, other: FieldOperator) -> FieldOperator:
        _require_same_basis(self.basis, other.basis)
        return FieldOperator(
            basis=self.basis,
            matrix=self.matrix @ other.matrix,
            safe_len=min(other.safe_len, self.safe_len - other.growth),
            growth=self.growth + other.growth,
        )

    def __add__(self, other: FieldOperator) -> FieldOperator:
        _require_same_basis(self.basis, other.basis)
        return FieldOperator(
            basis=self.basis,
            matrix=self.matrix + other.matrix,
            safe_len=min(self.safe_len, other.safe_len),
            growth=max(self.growth, other.growth),
        )

    def __sub__(self, other: FieldOperator) -> FieldOperator:
        return self + (-1.0) * other

    def __mul__(self, scalar) -> FieldOperator:
        return FieldOperator(
            basis=self.basis,
            matrix=self.matrix * complex(scalar),
            safe_len=self.safe_len,
            growth=self.growth,
        )

    __rmul__ = __mul__

    def dump(self) -> list[list[list[float]]]:
        """Row-major dense dump with complex entries as [re, im] pairs."""
        return [
            [[float(z.real), float(z.imag)] for z in row] for row in self.matrix
        ]


@dataclass(frozen=True)
class GaugeMultiplet:
    """The d prefix-shift generators sharing one word basis."""

    basis: WordBasis
    generators: tuple[FieldOperator, ...]

    @property
    def d(self) -> int:
        return len(self.generators)


def build_multiplet(basis: WordBasis) -> GaugeMultiplet:
    """Construct the d generators as prefix shifts on the word basis.

    Generator i sends |w> to |iw> for |w| <= L-1 and annihilates length-L
    words, which makes both truncated relations exact (see
    ``check_cuntz_relations``).
    """
    dim = basis.dim
    generators = []
    for letter in range(1, basis.d + 1):
        mat = np.zeros((dim, dim), dtype=np.complex128)
        for col, word in enumerate(basis.words):
            if len(word) <= basis.L - 1:
                row = basis.word_to_index((letter,) + word)
                mat[row, col] = 1.0
        mat.flags.writeable = False
        generators.append(
            FieldOperator(basis=basis, matrix=mat, safe_len=basis.L - 1, growth=1)
        )
    return GaugeMultiplet(basis=basis, generators=tuple(generators))


@dataclass(frozen=True)
class CuntzRelationReport:
    """Max-norm defects of the two truncated generator relations."""

    isometry_defect: float
    completeness_defect: float
    tol: float
    passed: bool


def check_cuntz_relations(
    m: GaugeMultiplet, tol: float = DEFAULT_TOL
) -> CuntzRelationReport:
    """Measure the defects of the truncated generator relations.

    Checks (i) adjoint(G_i) G_j = delta_ij * projector onto words of length
    <= L-1 and (ii) sum_i G_i adjoint(G_i) = identity minus the vacuum
    projector.  Both hold exactly for the prefix-shift construction.
    """
    basis = m.basis
    pi = length_projector(basis, basis.L - 1)
    isometry_defect = 0.0
    for i, gi in enumerate(m.generators):
        for j, gj in enumerate(m.generators):
            product = gi.matrix.conj().T @ gj.matrix
            target = pi if i == j else 0.0
            isometry_defect = max(isometry_defect, float(np.max(np.abs(product - target))))
    total = sum(g.matrix @ g.matrix.conj().T for g in m.generators)
    target = np.eye(basis.dim, dtype=np.complex128) - vacuum_projector(basis)
    completeness_defect = float(np.max(np.abs(total - target)))
    passed = isometry_defect <= tol and completeness_defect <= tol
    return CuntzRelationReport(
        isometry_defect=isometry_defect,
        completeness_defect=completeness_defect,
        tol=tol,
        passed=passed,
    )


def canonical_endomorphism(m: GaugeMultiplet, A: FieldOperator) -> FieldOperator:
    """Map A to sum_i G_i A adjoint(G_i).

    Intertwines with the generators, G_j A = result * G_j, exactly on words
    of length <= L-1 whenever A preserves that subspace.
    """
    _require_same_basis(m.basis, A.basis)
    out = np.zeros_like(A.matrix)
    for g in m.generators:
        out += g.matrix @ A.matrix @ g.matrix.conj().T
    return FieldOperator(
        basis=m.basis,
        matrix=out,
        safe_len=min(A.safe_len, m.basis.L - 1),
        growth=A.growth,
    )


def build_projectors(m: GaugeMultiplet) -> list[FieldOperator]:
    """Range projectors P_i = G_i adjoint(G_i), one per generator.

    Each P_i projects onto words beginning with letter i (any length up to
    L), so the projector identities hold on the whole truncated space:
    safe_len = L.
    """
    projectors = []
    for g in m.generators:
        mat = g.matrix @ g.matrix.conj().T
        mat.flags.writeable = False
        projectors.append(
            FieldOperator(basis=m.basis, matrix=mat, safe_len=m.basis.L, growth=0)
        )
    return projectors


def compose_generators(m: GaugeMultiplet, letters) -> FieldOperator:
    """Product G_{letters[0]} ... G_{letters[-1]} (rightmost acts first).

    The product of p generators carries safe_len = L - p.
    """
    letters = tuple(letters)
    if not letters:
        raise ValueError("need at least one letter to compose")
    if any(c < 1 or c > m.d for c in letters):
        raise ValueError(f"letters {letters!r} outside 1..{m.d}")
    factors = [m.generators[c - 1] for c in letters]
    return reduce(lambda a, b: a @ b, factors)


def build_isometry_S(
    m: GaugeMultiplet, max_permutation_d: int = DEFAULT_PERMUTATION_CAP
) -> FieldOperator:
    """Antisymmetrized degree-d generator product, normalized by 1/sqrt(d!).

    Sums sign(q) * G_{q(1)} ... G_{q(d)} over all permutations q of the d
    letters.  Isometric on its safe domain: adjoint(S) S equals the
    projector onto words of length <= L-d.
    """
    d, L = m.d, m.basis.L
    if L < d:
        raise ValueError(f"isometry needs L >= d, got d={d}, L={L}")
    if d > max_permutation_d:
        raise ValueError(
            f"antisymmetrization over d={d} letters exceeds the permutation cap "
            f"{max_permutation_d}"
        )
    acc = np.zeros((m.basis.dim, m.basis.dim), dtype=np.complex128)
    for q in itertools.permutations(range(1, d + 1)):
        acc += permutation_sign(q) * compose_generators(m, q).matrix
    acc /= math.sqrt(math.factorial(d))
    acc.flags.writeable = False
    return FieldOperator(basis=m.basis, matrix=acc, safe_len=L - d, growth=d)
