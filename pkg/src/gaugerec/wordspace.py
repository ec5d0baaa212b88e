"""Truncated word space: basis enumeration, state vectors, density matrices, fidelity.

The Hilbert space is spanned by all words over the alphabet {1, .., d} of
length 0..L, with the empty word (vacuum) at index 0.  Basis order is length
ascending, then lexicographic, so every matrix produced downstream is
byte-stable across runs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

#: default tolerance for algebraic relation checks
DEFAULT_TOL = 1e-9
#: tolerance for state normalization
NORMALIZATION_TOL = 1e-12
#: refuse to enumerate bases larger than this unless overridden
DEFAULT_DIM_CAP = 100_000

Word = tuple[int, ...]


class BasisMismatchError(ValueError):
    """Operands do not live on the same word basis."""


def word_dimension(d: int, L: int) -> int:
    """Number of words of length 0..L over a d-letter alphabet."""
    if d == 1:
        return L + 1
    return (d ** (L + 1) - 1) // (d - 1)


def parse_word(text: str) -> Word:
    """Parse a word serialized as a digit string; "" is the empty word."""
    letters = []
    for ch in text:
        if ch not in "123456789":
            raise ValueError(
                f"invalid letter {ch!r} in word {text!r}: serialized letters are digits 1..9"
            )
        letters.append(int(ch))
    return tuple(letters)


def format_word(word: Word) -> str:
    """Serialize a word as a digit string; the empty word becomes ""."""
    if any(c > 9 for c in word):
        raise ValueError(f"word {word!r} has letters above 9, which have no digit form")
    return "".join(str(c) for c in word)


@dataclass(frozen=True)
class WordBasis:
    """Ordered basis of all words of length <= L over letters 1..d."""

    d: int
    L: int
    words: tuple[Word, ...]
    lengths: np.ndarray = field(compare=False, repr=False)
    _index: dict[Word, int] = field(compare=False, repr=False)

    @property
    def dim(self) -> int:
        return len(self.words)

    def word_to_index(self, word: Word | list[int] | str) -> int:
        if isinstance(word, str):
            word = parse_word(word)
        try:
            return self._index[tuple(word)]
        except KeyError:
            raise ValueError(
                f"word {word!r} is not in the basis (d={self.d}, L={self.L})"
            ) from None

    def index_to_word(self, index: int) -> Word:
        return self.words[index]


def build_word_basis(d: int, L: int, max_dim: int = DEFAULT_DIM_CAP) -> WordBasis:
    """Enumerate the basis of words of length 0..L, length-then-lex ordered.

    Raises ValueError for nonpositive d or L, or when the dimension would
    exceed ``max_dim``.
    """
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise ValueError(f"alphabet size d must be a positive integer, got {d!r}")
    if not isinstance(L, int) or isinstance(L, bool) or L < 1:
        raise ValueError(f"maximum word length L must be a positive integer, got {L!r}")
    dim = word_dimension(d, L)
    if dim > max_dim:
        raise ValueError(
            f"basis dimension {dim} for (d={d}, L={L}) exceeds the cap {max_dim}"
        )
    words = tuple(
        w
        for n in range(L + 1)
        for w in itertools.product(range(1, d + 1), repeat=n)
    )
    lengths = np.fromiter((len(w) for w in words), dtype=np.int64, count=dim)
    lengths.flags.writeable = False
    index = {w: i for i, w in enumerate(words)}
    return WordBasis(d=d, L=L, words=words, lengths=lengths, _index=index)


def length_projector(basis: WordBasis, max_len: int) -> np.ndarray:
    """Dense matrix of the orthogonal projector onto words of length <= max_len."""
    return np.diag((basis.lengths <= max_len).astype(np.complex128))


def vacuum_projector(basis: WordBasis) -> np.ndarray:
    """Dense matrix of |vacuum><vacuum|."""
    p = np.zeros((basis.dim, basis.dim), dtype=np.complex128)
    p[0, 0] = 1.0
    return p


def _require_same_basis(a: WordBasis, b: WordBasis) -> None:
    if a is b:
        return
    if a != b:
        raise BasisMismatchError(
            f"word bases differ: (d={a.d}, L={a.L}) vs (d={b.d}, L={b.L})"
        )


@dataclass(frozen=True)
class StateVector:
    """Complex amplitude vector over a word basis."""

    basis: WordBasis
    amplitudes: np.ndarray
    normalized: bool = False

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def support_length(self) -> int:
        """Longest word carrying a nonzero amplitude; -1 for the zero vector."""
        nz = np.nonzero(self.amplitudes)[0]
        if nz.size == 0:
            return -1
        return int(self.basis.lengths[nz].max())


def make_state(
    basis: WordBasis,
    terms,
    normalize: bool = True,
) -> StateVector:
    """Place (word, amplitude) terms at their basis indices.

    Words may be tuples of letters or digit strings.  Duplicate words
    accumulate.  With ``normalize`` the result is scaled to unit norm and a
    zero vector is an error.
    """
    amplitudes = np.zeros(basis.dim, dtype=np.complex128)
    for word, amp in terms:
        if isinstance(word, str):
            word = parse_word(word)
        word = tuple(word)
        if any(c < 1 or c > basis.d for c in word):
            raise ValueError(f"word {word!r} uses letters outside 1..{basis.d}")
        if len(word) > basis.L:
            raise ValueError(
                f"word {word!r} has length {len(word)}, above the maximum {basis.L}"
            )
        amplitudes[basis.word_to_index(word)] += complex(amp)
    if not np.all(np.isfinite(amplitudes.view(np.float64))):
        raise ValueError("state amplitudes must be finite")
    norm = float(np.linalg.norm(amplitudes))
    if normalize:
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        amplitudes /= norm
        normalized = True
    else:
        normalized = abs(norm - 1.0) <= NORMALIZATION_TOL
    amplitudes.flags.writeable = False
    return StateVector(basis=basis, amplitudes=amplitudes, normalized=normalized)


@dataclass(frozen=True)
class DensityMatrix:
    """Dense dim x dim complex matrix over a word basis.

    Channel outputs are in general not trace one; the trace is reported, not
    enforced.
    """

    basis: WordBasis
    matrix: np.ndarray

    @property
    def trace(self) -> float:
        """Real part of the trace (the imaginary part is rounding noise)."""
        return float(np.trace(self.matrix).real)

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def min_eigenvalue(self) -> float:
        """Smallest eigenvalue of the hermitized matrix; >= -tol means PSD."""
        herm = 0.5 * (self.matrix + self.matrix.conj().T)
        return float(np.linalg.eigvalsh(herm)[0])


def pure_density(psi: StateVector) -> DensityMatrix:
    """|psi><psi| as a density matrix."""
    mat = np.outer(psi.amplitudes, psi.amplitudes.conj())
    return DensityMatrix(basis=psi.basis, matrix=mat)


def fidelity(phi: StateVector, rho: DensityMatrix, tol: float = DEFAULT_TOL) -> float:
    """Diagonal matrix element <phi|rho|phi> as a real number.

    ``phi`` must be normalized.  A non-negligible imaginary part signals a
    non-Hermitian ``rho`` and raises.
    """
    _require_same_basis(phi.basis, rho.basis)
    if abs(phi.norm() - 1.0) > DEFAULT_TOL:
        raise ValueError("fidelity reference state must be normalized")
    value = complex(np.vdot(phi.amplitudes, rho.matrix @ phi.amplitudes))
    if abs(value.imag) > tol:
        raise ValueError(
            f"fidelity has imaginary part {value.imag:.3e}; density matrix is not Hermitian"
        )
    return float(value.real)
