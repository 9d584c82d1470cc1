"""Block-diagonalizing generators for penalty-gadget Hamiltonians.

Perturbative route: with H0 a mediator penalty and V = V_d + V_od split by
the mediator flip structure, the generator orders are

    S1 = L0^-1(V_od)
    S2 = L0^-1([S1, V_d])
    S3 = -1/3 L0^-1([S1,[S1,[S1, H0]]]) + L0^-1([S2, V_d])

where L0^-1 inverts x -> [H0, x] on block-off-diagonal operators.  Closed
forms for both gadget kinds reproduce these orders exactly.

Exact route: the direct rotation between the spectral low subspace of H and
the mediator |0...0> subspace, S = log U with eigenphases pinned to
(-pi, pi).  The result block-diagonalizes H to machine precision.

Generators are anti-Hermitian and carry the stored-form convention from
the pauli module (actual = 1j * stored).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .pauli import PauliString, PauliSum, commutator
from .spectral import (
    DEFAULT_DENSE_CAP,
    DenseOperator,
    ProjectorSplit,
    block_extract,
    conjugate_by_exp,
    matrix_to_pauli_sum,
    to_matrix,
)
from .gadgets import GadgetInstance

__all__ = [
    "SWGenerator",
    "EffectiveHamiltonian",
    "l0_inverse",
    "block_split",
    "sw_perturbative",
    "sw_gadget_closed_form",
    "sw_exact",
    "effective_hamiltonian",
    "gadget_split",
]


@dataclass
class SWGenerator:
    """Anti-Hermitian rotation generator tied to a projector split."""

    s: PauliSum
    order: int | str
    split: ProjectorSplit

    def __post_init__(self) -> None:
        if not self.s.is_zero() and not self.s.antiherm:
            raise ValueError("generator must be anti-Hermitian (stored form)")


@dataclass
class EffectiveHamiltonian:
    """Low block of the rotated Hamiltonian with residual diagnostics."""

    h_eff: DenseOperator
    offdiag_residual: float
    truncation_error_bound: float


def gadget_split(gadget: GadgetInstance, n_qubits: int) -> ProjectorSplit:
    return ProjectorSplit(n_qubits=n_qubits, mediators=(gadget.mediator,))


def _penalty_structure(h0: PauliSum) -> dict[int, float]:
    """Validate the penalty form and return per-qubit |1> energies.

    Accepts sums whose non-identity terms are all single-qubit Z.  The
    energy of flipping qubit u to |1> is -2 * coeff(Z_u).
    """
    gaps: dict[int, float] = {}
    for term in h0.terms:
        if term.string.weight != 1 or term.string.letters[0][1] != "Z":
            raise ValueError(
                "penalty Hamiltonian must be a sum of single-qubit Z terms"
            )
        qubit = term.string.letters[0][0]
        gaps[qubit] = -2.0 * term.coefficient
    if not gaps:
        raise ValueError("penalty Hamiltonian has no Z terms")
    if h0.antiherm:
        raise ValueError("penalty Hamiltonian must be Hermitian")
    return gaps


def l0_inverse(h0: PauliSum, x: PauliSum) -> PauliSum:
    """Solve [h0, s] = x for s on the block-off-diagonal sector.

    Valid when every term of x flips exactly one penalty qubit of h0; the
    energy denominator is then the single-qubit gap regardless of the other
    factors.  Terms flipping no penalty qubit live in the block-diagonal
    kernel of [h0, .] and are rejected; terms flipping two or more penalty
    qubits would need projector-resolved denominators and are out of scope.
    """
    gaps = _penalty_structure(h0)
    prefactor = 1j if x.antiherm else 1.0
    acc: dict[PauliString, complex] = {}
    for term in x.terms:
        flipped = [
            (q, letter)
            for q, letter in term.string.letters
            if letter in ("X", "Y") and q in gaps
        ]
        if not flipped:
            raise ValueError(
                f"term {term.string} has a block-diagonal part; [h0, .] cannot produce it"
            )
        if len(flipped) > 1:
            raise ValueError(
                f"term {term.string} flips {len(flipped)} penalty qubits; "
                "cross-block energies are not single-gap"
            )
        (u, letter) = flipped[0]
        gap = gaps[u]
        if gap == 0.0:
            raise ValueError(f"degenerate cross-block energies on qubit {u}")
        actual = prefactor * term.coefficient
        rest = {q: l for q, l in term.string.letters if q != u}
        if letter == "X":
            rest[u] = "Y"
            out_coeff = -1j * actual / gap
        else:
            rest[u] = "X"
            out_coeff = 1j * actual / gap
        string = PauliString.from_map(rest)
        acc[string] = acc.get(string, 0.0) + out_coeff
    real = {s: c.real for s, c in acc.items() if c.real != 0.0}
    imag = {s: c.imag for s, c in acc.items() if c.imag != 0.0}
    if real and imag:
        raise ValueError("x mixes Hermitian and anti-Hermitian content")
    if imag:
        return PauliSum(imag, antiherm=True)
    return PauliSum(real)


def block_split(v: PauliSum, split: ProjectorSplit) -> tuple[PauliSum, PauliSum]:
    """Exact (V_d, V_od) split for a single-mediator projector.

    A term is block-off-diagonal exactly when it flips the mediator, i.e.
    carries X or Y there.
    """
    if len(split.mediators) != 1:
        raise ValueError("block split requires a single-mediator projector")
    (u,) = split.mediators
    diag: list[tuple[float, PauliString]] = []
    offd: list[tuple[float, PauliString]] = []
    for term in v.terms:
        if term.string.letter(u) in ("X", "Y"):
            offd.append((term.coefficient, term.string))
        else:
            diag.append((term.coefficient, term.string))
    return (
        PauliSum(diag, v.offset, v.antiherm),
        PauliSum(offd, antiherm=v.antiherm),
    )


def _check_offdiagonal(s: PauliSum, split: ProjectorSplit) -> None:
    if len(split.mediators) == 1:
        (u,) = split.mediators
        for term in s.terms:
            if term.string.letter(u) not in ("X", "Y"):
                raise ValueError("generator term does not flip the mediator")
        if s.offset != 0.0:
            raise ValueError("generator carries an identity offset")


def sw_perturbative(
    h0: PauliSum, v: PauliSum, split: ProjectorSplit, order: int
) -> SWGenerator:
    """Symbolic generator through the requested perturbative order (1..3)."""
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2 or 3")
    if len(split.mediators) != 1:
        raise ValueError("perturbative construction works per mediator")
    v_d, v_od = block_split(v, split)
    s = l0_inverse(h0, v_od) if not v_od.is_zero() else PauliSum.zero()
    s1 = s
    if order >= 2 and not s1.is_zero():
        l1_vd = commutator(s1, v_d)
        s2 = l0_inverse(h0, l1_vd) if not l1_vd.is_zero() else PauliSum.zero()
        s = s + s2
        if order >= 3:
            c1 = commutator(s1, h0)
            c3 = commutator(s1, commutator(s1, c1))
            t1 = (
                l0_inverse(h0, c3) * (-1.0 / 3.0)
                if not c3.is_zero()
                else PauliSum.zero()
            )
            l2_vd = commutator(s2, v_d)
            t2 = l0_inverse(h0, l2_vd) if not l2_vd.is_zero() else PauliSum.zero()
            s = s + t1 + t2
    gen = SWGenerator(s=s, order=order, split=split)
    _check_offdiagonal(gen.s, split)
    return gen


def sw_gadget_closed_form(gadget: GadgetInstance, n_qubits: int | None = None) -> SWGenerator:
    """Closed-form generator for a single gadget.

    Subdivision: S = -i sqrt(J/(2 Delta)) Y_u (B - A), first order.
    Three-to-two: S = (-i x / sqrt(2)) Y_u (B - A)
                      [1 + x C + x^2 C^2 - (2 x^2 / 3)(B - A)^2],
    third order, with x = (J / Delta)^(1/3).
    """
    if n_qubits is None:
        n_qubits = max(max(gadget.source.support), gadget.mediator) + 1
    split = ProjectorSplit(n_qubits=n_qubits, mediators=(gadget.mediator,))
    j, delta = gadget.j, gadget.delta
    y_u = PauliSum([(1.0, PauliString.single(gadget.mediator, "Y"))])
    if gadget.kind == "subdivision":
        a, b = gadget.source.factors
        b_minus_a = b - a
        stored = -math.sqrt(j / (2.0 * delta)) * y_u.times(b_minus_a)
        order: int | str = 1
    elif gadget.kind == "three-to-two":
        a, b, c = gadget.source.factors
        b_minus_a = b - a
        x = gadget.x
        bracket = (
            PauliSum.identity(1.0)
            + x * c
            + (x * x) * c.times(c)
            - (2.0 * x * x / 3.0) * b_minus_a.times(b_minus_a)
        )
        stored = (-x / math.sqrt(2.0)) * y_u.times(b_minus_a).times(bracket)
        order = 3
    else:
        raise ValueError(f"unknown gadget kind {gadget.kind!r}")
    s = PauliSum({t.string: t.coefficient for t in stored.terms}, stored.offset, antiherm=True)
    gen = SWGenerator(s=s, order=order, split=split)
    _check_offdiagonal(gen.s, split)
    return gen


def sw_exact(
    h: PauliSum,
    split: ProjectorSplit,
    dense_cap: int = DEFAULT_DENSE_CAP,
    gap_tol: float = 1e-10,
) -> SWGenerator:
    """Exact generator from the direct rotation onto the low spectral subspace.

    Requires a spectral gap at the cut between the lowest rank(P)
    eigenvalues and the rest, and the low subspace must not be orthogonal
    to the range of P anywhere (norm of P - P_spec below 1).
    """
    n = split.n_qubits
    h_mat = to_matrix(h, n, dense_cap=dense_cap).entries
    vals, vecs = np.linalg.eigh(h_mat)
    r = split.rank_p
    if r == h_mat.shape[0]:
        return SWGenerator(s=PauliSum.zero(), order="exact", split=split)
    scale = max(abs(vals[0]), abs(vals[-1]), 1.0)
    if vals[r] - vals[r - 1] <= gap_tol * scale:
        raise ValueError(
            f"spectral gap closes at the cut: E[{r-1}]={vals[r-1]:.6g}, E[{r}]={vals[r]:.6g}"
        )
    low = vecs[:, :r]
    p_spec = low @ low.conj().T
    p_mat = split.projector_matrix()
    distance = float(np.linalg.norm(p_mat - p_spec, 2))
    if distance >= 1.0 - 1e-12:
        raise ValueError(
            f"low subspace too far from the mediator sector (distance {distance:.6f})"
        )
    eye = np.eye(h_mat.shape[0], dtype=complex)
    r_op = p_mat @ p_spec + (eye - p_mat) @ (eye - p_spec)
    w, _, vh = np.linalg.svd(r_op)
    u = w @ vh
    s_mat = scipy.linalg.logm(u)
    s_mat = 0.5 * (s_mat - s_mat.conj().T)
    phases = np.angle(np.linalg.eigvals(u))
    if np.max(np.abs(phases)) >= math.pi - 1e-9:
        raise ValueError("rotation eigenphase reached the branch cut")
    if np.abs(s_mat).max() < 1e-12:
        # rotation within float noise of the identity
        s = PauliSum.zero()
    else:
        s = matrix_to_pauli_sum(s_mat, n)
    if not s.is_zero() and not s.antiherm:
        raise ValueError("direct rotation produced a non-anti-Hermitian log")
    gen = SWGenerator(s=s, order="exact", split=split)
    # Defining properties, verified on the returned stored form.
    rotated = conjugate_by_exp(gen.s, h, n, dense_cap=dense_cap)
    blocks = block_extract(rotated, split)
    if blocks.norm_pq > 1e-10 * scale:
        raise ValueError(
            f"exact generator left off-diagonal residual {blocks.norm_pq:.3e}"
        )
    s_dense = 1j * to_matrix(
        PauliSum({t.string: t.coefficient for t in s.terms}, s.offset), n
    ).entries
    s_blocks = block_extract(s_dense, split)
    if max(s_blocks.norm_pp, s_blocks.norm_qq) > 1e-10:
        raise ValueError("exact generator is not block-off-diagonal")
    return gen


def effective_hamiltonian(
    h: PauliSum,
    gen: SWGenerator,
    dense_cap: int = DEFAULT_DENSE_CAP,
) -> EffectiveHamiltonian:
    """P block of e^S H e^{-S} in the P basis, with residuals.

    The truncation bound is the series-cut estimate
    (1/3!) |P L^3(H) P| + (1/4!) |L^4(H)| for perturbative generators and
    zero for exact ones.
    """
    n = gen.split.n_qubits
    rotated = conjugate_by_exp(gen.s, h, n, dense_cap=dense_cap)
    blocks = block_extract(rotated, gen.split)
    if gen.order == "exact":
        bound = 0.0
    else:
        l3 = h
        for _ in range(3):
            l3 = commutator(gen.s, l3)
        l4 = commutator(gen.s, l3)
        l3_mat = to_matrix(l3, n, dense_cap=dense_cap).entries
        p = gen.split.p_indices()
        l3_block = l3_mat[np.ix_(p, p)]
        norm_l3 = float(np.linalg.norm(l3_block, 2)) if l3_block.size else 0.0
        l4_mat = to_matrix(l4, n, dense_cap=dense_cap).entries
        norm_l4 = float(np.linalg.norm(l4_mat, 2))
        bound = norm_l3 / 6.0 + norm_l4 / 24.0
    h_eff = DenseOperator(entries=blocks.pp, hermitian=True)
    return EffectiveHamiltonian(
        h_eff=h_eff,
        offdiag_residual=blocks.norm_pq,
        truncation_error_bound=bound,
    )
