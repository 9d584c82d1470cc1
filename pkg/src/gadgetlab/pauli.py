"""Pauli-string operator algebra with exact phase bookkeeping.

Operators are real linear combinations of tensor products of single-qubit
Pauli matrices.  A ``PauliString`` maps qubit indices to letters X, Y, Z
(identity factors are implicit), a ``PauliSum`` is a normalized Hermitian
combination of strings plus a separately tracked identity offset.

Anti-Hermitian operators appear as generators of basis rotations.  They are
stored through the convention

    actual operator = 1j * (stored Hermitian sum)      when antiherm is True

so every coefficient that ever gets stored is real.  The commutator of two
Hermitian sums is anti-Hermitian and is returned in exactly this stored form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np

__all__ = [
    "PauliString",
    "PauliTerm",
    "PauliSum",
    "LocalityProfile",
    "FormatError",
    "multiply",
    "commutator",
    "embed",
    "locality_profile",
    "operator_norm_local",
    "parse_hamiltonian",
    "serialize_hamiltonian",
    "load_hamiltonian",
]

_LETTERS = ("X", "Y", "Z")

# Single-qubit products a*b -> (phase, letter).  Empty letter means identity.
_SINGLE_MUL: dict[tuple[str, str], tuple[complex, str]] = {
    ("X", "X"): (1.0, ""),
    ("Y", "Y"): (1.0, ""),
    ("Z", "Z"): (1.0, ""),
    ("X", "Y"): (1j, "Z"),
    ("Y", "X"): (-1j, "Z"),
    ("Y", "Z"): (1j, "X"),
    ("Z", "Y"): (-1j, "X"),
    ("Z", "X"): (1j, "Y"),
    ("X", "Z"): (-1j, "Y"),
}

_PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}

DEFAULT_NORM_SUPPORT_CAP = 12


class FormatError(ValueError):
    """Raised when Hamiltonian text input violates the line grammar."""


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Pauli letters on named qubits.

    ``letters`` is a tuple of (qubit, letter) pairs sorted by qubit index;
    qubits not listed carry identity.  The empty string is the identity
    operator and is representable, although normalized sums divert pure
    identity weight into their offset instead.
    """

    letters: tuple[tuple[int, str], ...]

    def __post_init__(self) -> None:
        qubits = [q for q, _ in self.letters]
        if qubits != sorted(set(qubits)):
            raise ValueError("qubits must be unique and sorted")
        for q, letter in self.letters:
            if q < 0:
                raise ValueError(f"negative qubit index {q}")
            if letter not in _LETTERS:
                raise ValueError(f"unknown Pauli letter {letter!r}")

    @classmethod
    def from_map(cls, mapping: Mapping[int, str]) -> "PauliString":
        return cls(tuple(sorted(mapping.items())))

    @classmethod
    def single(cls, qubit: int, letter: str) -> "PauliString":
        return cls(((qubit, letter),))

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(q for q, _ in self.letters)

    @property
    def weight(self) -> int:
        return len(self.letters)

    def letter(self, qubit: int) -> str:
        for q, letter in self.letters:
            if q == qubit:
                return letter
        return "I"

    def sort_key(self) -> tuple:
        return (self.support, tuple(letter for _, letter in self.letters))

    def is_identity(self) -> bool:
        return not self.letters

    def __str__(self) -> str:
        if not self.letters:
            return "I"
        return " ".join(f"{letter}{q}" for q, letter in self.letters)


def multiply(a: PauliString, b: PauliString) -> tuple[complex, PauliString]:
    """Product of two strings as (phase, string) with phase in {1,-1,i,-i}."""
    phase: complex = 1.0
    out: list[tuple[int, str]] = []
    ai, bi = 0, 0
    la, lb = a.letters, b.letters
    while ai < len(la) and bi < len(lb):
        qa, xa = la[ai]
        qb, xb = lb[bi]
        if qa < qb:
            out.append((qa, xa))
            ai += 1
        elif qb < qa:
            out.append((qb, xb))
            bi += 1
        else:
            ph, letter = _SINGLE_MUL[(xa, xb)]
            phase *= ph
            if letter:
                out.append((qa, letter))
            ai += 1
            bi += 1
    out.extend(la[ai:])
    out.extend(lb[bi:])
    return phase, PauliString(tuple(out))


def _strings_commute(a: PauliString, b: PauliString) -> bool:
    # Strings commute iff they differ on an even number of shared qubits.
    differing = 0
    bi = 0
    lb = b.letters
    for qa, xa in a.letters:
        while bi < len(lb) and lb[bi][0] < qa:
            bi += 1
        if bi < len(lb) and lb[bi][0] == qa and lb[bi][1] != xa:
            differing += 1
    return differing % 2 == 0


@dataclass(frozen=True)
class PauliTerm:
    """Single weighted string.  Coefficients are always real."""

    coefficient: float
    string: PauliString

    def __post_init__(self) -> None:
        if not math.isfinite(self.coefficient):
            raise ValueError("coefficient must be finite")


class PauliSum:
    """Normalized real combination of Pauli strings plus identity offset.

    Construction merges duplicate strings, drops exact-zero coefficients and
    moves all-identity weight into ``offset``.  Term order is lexicographic
    by (support, letters), which makes serialization deterministic.

    The ``antiherm`` flag marks stored form of an anti-Hermitian operator;
    see the module docstring for the sign convention.
    """

    __slots__ = ("_terms", "_offset", "_antiherm")

    def __init__(
        self,
        terms: Mapping[PauliString, float] | Iterable[tuple[float, PauliString]] = (),
        offset: float = 0.0,
        antiherm: bool = False,
    ) -> None:
        acc: dict[PauliString, float] = {}
        if isinstance(terms, Mapping):
            items: Iterable[tuple[float, PauliString]] = (
                (c, s) for s, c in terms.items()
            )
        else:
            items = terms
        off = float(offset)
        for coeff, string in items:
            coeff = float(coeff)
            if not math.isfinite(coeff):
                raise ValueError("coefficient must be finite")
            if string.is_identity():
                off += coeff
                continue
            acc[string] = acc.get(string, 0.0) + coeff
        self._terms: dict[PauliString, float] = {
            s: c for s, c in acc.items() if c != 0.0
        }
        self._offset = off
        self._antiherm = bool(antiherm)

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls) -> "PauliSum":
        return cls()

    @classmethod
    def identity(cls, coefficient: float = 1.0) -> "PauliSum":
        return cls(offset=coefficient)

    @classmethod
    def from_term(
        cls, coefficient: float, string: PauliString, antiherm: bool = False
    ) -> "PauliSum":
        return cls([(coefficient, string)], antiherm=antiherm)

    @classmethod
    def from_letter(cls, qubit: int, letter: str, coefficient: float = 1.0) -> "PauliSum":
        return cls([(coefficient, PauliString.single(qubit, letter))])

    # -- views -------------------------------------------------------------

    @property
    def offset(self) -> float:
        return self._offset

    @property
    def antiherm(self) -> bool:
        return self._antiherm

    @property
    def terms(self) -> tuple[PauliTerm, ...]:
        ordered = sorted(self._terms.items(), key=lambda kv: kv[0].sort_key())
        return tuple(PauliTerm(c, s) for s, c in ordered)

    def coefficient(self, string: PauliString) -> float:
        if string.is_identity():
            return self._offset
        return self._terms.get(string, 0.0)

    @property
    def support(self) -> tuple[int, ...]:
        qubits: set[int] = set()
        for s in self._terms:
            qubits.update(s.support)
        return tuple(sorted(qubits))

    @property
    def n_terms(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms and self._offset == 0.0

    def __iter__(self) -> Iterator[PauliTerm]:
        return iter(self.terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PauliSum):
            return NotImplemented
        if self.is_zero() and other.is_zero():
            return True
        return (
            self._terms == other._terms
            and self._offset == other._offset
            and self._antiherm == other._antiherm
        )

    def __hash__(self) -> int:  # pragma: no cover - sums are mostly unhashed
        return hash((frozenset(self._terms.items()), self._offset, self._antiherm))

    def __repr__(self) -> str:
        head = "PauliSum(antiherm)" if self._antiherm else "PauliSum"
        parts = [f"{c:+.6g} {s}" for s, c in sorted(
            self._terms.items(), key=lambda kv: kv[0].sort_key())]
        if self._offset != 0.0 or not parts:
            parts.append(f"{self._offset:+.6g} I")
        return f"{head}[{', '.join(parts)}]"

    # -- arithmetic --------------------------------------------------------

    def _check_flag(self, other: "PauliSum") -> bool:
        if self.is_zero():
            return other._antiherm
        if other.is_zero():
            return self._antiherm
        if self._antiherm != other._antiherm:
            raise ValueError("cannot combine Hermitian and anti-Hermitian sums")
        return self._antiherm

    def __add__(self, other: "PauliSum") -> "PauliSum":
        flag = self._check_flag(other)
        acc = dict(self._terms)
        for s, c in other._terms.items():
            acc[s] = acc.get(s, 0.0) + c
        return PauliSum(acc, self._offset + other._offset, flag)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (-other)

    def __neg__(self) -> "PauliSum":
        return self * -1.0

    def __mul__(self, scalar: float) -> "PauliSum":
        scalar = float(scalar)
        return PauliSum(
            {s: c * scalar for s, c in self._terms.items()},
            self._offset * scalar,
            self._antiherm,
        )

    __rmul__ = __mul__

    def times(self, other: "PauliSum") -> "PauliSum":
        """Operator product.

        Valid only when the result is itself purely Hermitian or purely
        anti-Hermitian, which covers the gadget constructions used here
        (products of disjoint-support factors, even powers, and one flagged
        operand).  Raises ValueError otherwise.
        """
        sigma = (1 if self._antiherm else 0) + (1 if other._antiherm else 0)
        acc: dict[PauliString, complex] = {}
        identity = PauliString(())
        for sa, ca in list(self._terms.items()) + [(identity, self._offset)]:
            if ca == 0.0:
                continue
            for sb, cb in list(other._terms.items()) + [(identity, other._offset)]:
                if cb == 0.0:
                    continue
                phase, prod = multiply(sa, sb)
                acc[prod] = acc.get(prod, 0.0) + ca * cb * phase
        return _from_complex(acc, sigma)

    def allclose(self, other: "PauliSum", rtol: float = 1e-12, atol: float = 1e-12) -> bool:
        """Structural comparison with floating tolerance on coefficients."""
        if not self.is_zero() and not other.is_zero():
            if self._antiherm != other._antiherm:
                return False
        strings = set(self._terms) | set(other._terms)
        scale = max(
            [abs(c) for c in self._terms.values()]
            + [abs(c) for c in other._terms.values()]
            + [abs(self._offset), abs(other._offset), 0.0]
        )
        tol = atol + rtol * scale
        if abs(self._offset - other._offset) > tol:
            return False
        return all(
            abs(self._terms.get(s, 0.0) - other._terms.get(s, 0.0)) <= tol
            for s in strings
        )


def _from_complex(acc: Mapping[PauliString, complex], sigma: int) -> PauliSum:
    """Build a PauliSum from complex accumulation of i**sigma * (real sums).

    Every contribution is purely real or purely imaginary relative to the
    i**sigma prefactor, so after folding the prefactor in, the result must
    come out with all-real or all-imaginary coefficients.  Mixed content
    means the operator is neither Hermitian nor anti-Hermitian.
    """
    prefactor = 1j ** (sigma % 4)
    real: dict[PauliString, float] = {}
    imag: dict[PauliString, float] = {}
    for s, c in acc.items():
        val = c * prefactor
        if val.real != 0.0:
            real[s] = real.get(s, 0.0) + val.real
        if val.imag != 0.0:
            imag[s] = imag.get(s, 0.0) + val.imag
    real = {s: c for s, c in real.items() if c != 0.0}
    imag = {s: c for s, c in imag.items() if c != 0.0}
    if real and imag:
        raise ValueError("product is neither Hermitian nor anti-Hermitian")
    if imag:
        off = imag.pop(PauliString(()), 0.0)
        return PauliSum(imag, off, antiherm=True)
    off = real.pop(PauliString(()), 0.0) if real else 0.0
    return PauliSum(real, off, antiherm=False)


def commutator(a: PauliSum, b: PauliSum) -> PauliSum:
    """Commutator [a, b] in stored form.

    For Hermitian a, b the result is anti-Hermitian and is returned with the
    antiherm flag set, i.e. the stored Hermitian sum equals -1j*[a, b].
    Mixed Hermitian/anti-Hermitian inputs produce a plain Hermitian sum.
    Identity offsets commute with everything and never contribute.
    """
    sigma = (1 if a.antiherm else 0) + (1 if b.antiherm else 0)
    acc: dict[PauliString, complex] = {}
    for ta in a.terms:
        for tb in b.terms:
            if _strings_commute(ta.string, tb.string):
                continue
            phase, prod = multiply(ta.string, tb.string)
            # anticommuting strings: ab - ba = 2ab
            acc[prod] = acc.get(prod, 0.0) + 2.0 * ta.coefficient * tb.coefficient * phase
    return _from_complex(acc, sigma)


def embed(op: PauliSum, qubit_map: Mapping[int, int]) -> PauliSum:
    """Relabel qubits through an injective map; offsets pass through."""
    src = list(qubit_map.keys())
    dst = list(qubit_map.values())
    if len(set(dst)) != len(dst):
        raise ValueError("qubit map is not injective")
    missing = [q for q in op.support if q not in qubit_map]
    if missing:
        raise ValueError(f"qubit map undefined on support qubits {missing}")
    del src
    moved = []
    for term in op.terms:
        mapped = PauliString.from_map(
            {qubit_map[q]: letter for q, letter in term.string.letters}
        )
        moved.append((term.coefficient, mapped))
    return PauliSum(moved, op.offset, op.antiherm)


@dataclass(frozen=True)
class LocalityProfile:
    """Structural summary: max weight k, max per-qubit degree m, max |coeff| J.

    Identity offsets are excluded from all three numbers.
    """

    k: int
    m: int
    j: float


def locality_profile(h: PauliSum) -> LocalityProfile:
    k = 0
    j = 0.0
    degree: dict[int, int] = {}
    for term in h.terms:
        k = max(k, term.string.weight)
        j = max(j, abs(term.coefficient))
        for q in term.string.support:
            degree[q] = degree.get(q, 0) + 1
    m = max(degree.values()) if degree else 0
    return LocalityProfile(k=k, m=m, j=j)


def _dense_on_support(op: PauliSum, qubits: tuple[int, ...]) -> np.ndarray:
    """Dense matrix of the stored sum on the given qubits, first qubit = LSB."""
    dim = 2 ** len(qubits)
    out = np.zeros((dim, dim), dtype=complex)
    if op.offset:
        out += op.offset * np.eye(dim)
    for term in op.terms:
        factor = np.array([[term.coefficient]], dtype=complex)
        for q in reversed(qubits):
            factor = np.kron(factor, _PAULI_MATRICES[term.string.letter(q)])
        out += factor
    return out


def operator_norm_local(op: PauliSum, support_cap: int = DEFAULT_NORM_SUPPORT_CAP) -> float:
    """Spectral norm computed on the operator's support qubits only.

    Tensoring with identity does not change the spectral norm, so the
    result equals the norm on any larger register.  The stored sum of a
    flagged operator has the same norm as the operator itself.
    """
    qubits = op.support
    if len(qubits) > support_cap:
        raise ValueError(
            f"support size {len(qubits)} exceeds cap {support_cap}"
        )
    if not qubits:
        return abs(op.offset)
    mat = _dense_on_support(op, qubits)
    eigs = np.linalg.eigvalsh(mat)
    return float(np.max(np.abs(eigs)))


# -- text format -----------------------------------------------------------
#
# One term per line: a real coefficient followed by letter-index factors,
# e.g. "1.0 Z0 Z1 Z2 Z3".  The all-identity term is written "<coeff> I".
# '#' starts a comment, blank lines are ignored.


def parse_hamiltonian(text: str) -> PauliSum:
    terms: list[tuple[float, PauliString]] = []
    offset = 0.0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            coeff = float(tokens[0])
        except ValueError:
            raise FormatError(f"line {lineno}: bad coefficient {tokens[0]!r}") from None
        if not math.isfinite(coeff):
            raise FormatError(f"line {lineno}: non-finite coefficient")
        if len(tokens) == 1:
            raise FormatError(f"line {lineno}: coefficient without any factor")
        if len(tokens) == 2 and tokens[1] == "I":
            offset += coeff
            continue
        seen: dict[int, str] = {}
        for tok in tokens[1:]:
            letter, idx = tok[:1], tok[1:]
            if letter not in _LETTERS or not idx.isdigit():
                raise FormatError(f"line {lineno}: bad factor {tok!r}")
            qubit = int(idx)
            if qubit in seen:
                raise FormatError(f"line {lineno}: duplicate qubit {qubit}")
            seen[qubit] = letter
        terms.append((coeff, PauliString.from_map(seen)))
    return PauliSum(terms, offset)


def load_hamiltonian(path: str) -> PauliSum:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_hamiltonian(fh.read())


def serialize_hamiltonian(h: PauliSum, header_lines: Iterable[str] = ()) -> str:
    """Write normalized terms one per line, offset last as an identity term."""
    lines = [f"# {line}" for line in header_lines]
    for term in h.terms:
        lines.append(f"{term.coefficient:.17g} {term.string}")
    if h.offset != 0.0:
        lines.append(f"{h.offset:.17g} I")
    return "\n".join(lines) + "\n"
