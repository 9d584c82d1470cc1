"""Dense and sparse realizations of Pauli sums, plus spectral primitives.

Computational-basis convention: qubit 0 is the least-significant bit of the
basis index, so the matrix of a sum on n qubits is built with qubit n-1 as
the outermost Kronecker factor.

The ground-state solver takes a dense route (full eigendecomposition) for
small registers and a Lanczos route (ARPACK, which keeps the full Krylov
basis orthogonal) above that.  Both routes report an explicit eigenpair
residual, checked against a scale-aware threshold: for penalty-gadget
Hamiltonians the coefficient scale can reach 1e10 and an absolute residual
criterion would be meaningless in double precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .pauli import PauliString, PauliSum, _PAULI_MATRICES

__all__ = [
    "DEFAULT_DENSE_CAP",
    "DEFAULT_ENERGY_DENSE_CAP",
    "DEFAULT_ITERATIVE_CAP",
    "DEFAULT_MAX_ITER",
    "ConvergenceError",
    "DenseOperator",
    "ProjectorSplit",
    "BlockDecomposition",
    "GroundStateResult",
    "to_matrix",
    "to_sparse",
    "ground_energy",
    "conjugate_by_exp",
    "block_extract",
    "pauli_decompose",
    "matrix_to_pauli_sum",
]

# Hard cap for materializing dense matrices.
DEFAULT_DENSE_CAP = 14
# Switch point of ground_energy between the dense and Lanczos routes; full
# eigendecomposition beyond 12 qubits is too slow on a single core.
DEFAULT_ENERGY_DENSE_CAP = 12
DEFAULT_ITERATIVE_CAP = 20
DEFAULT_MAX_ITER = 2000

_RESIDUAL_TOL = 1e-8


class ConvergenceError(RuntimeError):
    """Iterative eigensolver failed to reach the requested accuracy."""


@dataclass
class DenseOperator:
    """Dense complex matrix together with a Hermiticity tag."""

    entries: np.ndarray
    hermitian: bool

    @property
    def dimension(self) -> int:
        return self.entries.shape[0]

    @property
    def n_qubits(self) -> int:
        return int(self.dimension).bit_length() - 1


def _coefficient_scale(h: PauliSum) -> float:
    total = abs(h.offset)
    for term in h.terms:
        total += abs(term.coefficient)
    return max(total, 1.0)


def _sparse_string(string: PauliString, n_qubits: int) -> sp.csr_matrix:
    mat = sp.identity(1, dtype=complex, format="csr")
    for q in range(n_qubits - 1, -1, -1):
        mat = sp.kron(mat, sp.csr_matrix(_PAULI_MATRICES[string.letter(q)]), format="csr")
    return mat


def to_sparse(h: PauliSum, n_qubits: int) -> sp.csr_matrix:
    """CSR matrix of the stored sum (the antiherm prefactor is not applied)."""
    support = h.support
    if support and support[-1] >= n_qubits:
        raise ValueError(f"support qubit {support[-1]} outside register of {n_qubits}")
    dim = 2**n_qubits
    out = sp.csr_matrix((dim, dim), dtype=complex)
    for term in h.terms:
        out = out + term.coefficient * _sparse_string(term.string, n_qubits)
    if h.offset:
        out = out + h.offset * sp.identity(dim, dtype=complex, format="csr")
    return out.tocsr()


def to_matrix(h: PauliSum, n_qubits: int, dense_cap: int = DEFAULT_DENSE_CAP) -> DenseOperator:
    """Dense matrix of the actual operator (includes the 1j antiherm prefactor)."""
    if n_qubits > dense_cap:
        raise ValueError(f"{n_qubits} qubits exceeds dense cap {dense_cap}")
    if n_qubits < 0:
        raise ValueError("negative qubit count")
    entries = np.asarray(to_sparse(h, n_qubits).todense())
    if h.antiherm:
        entries = 1j * entries
    return DenseOperator(entries=entries, hermitian=not h.antiherm)


@dataclass(frozen=True)
class ProjectorSplit:
    """Low/high splitting induced by a set of mediator qubits.

    P projects every mediator onto |0>, Q = 1 - P.  With no mediators the
    split is trivial (P = identity).
    """

    n_qubits: int
    mediators: tuple[int, ...]

    def __post_init__(self) -> None:
        meds = tuple(sorted(set(self.mediators)))
        object.__setattr__(self, "mediators", meds)
        if meds and (meds[0] < 0 or meds[-1] >= self.n_qubits):
            raise ValueError("mediator index outside register")

    @property
    def rank_p(self) -> int:
        return 2 ** (self.n_qubits - len(self.mediators))

    def p_mask(self) -> np.ndarray:
        idx = np.arange(2**self.n_qubits)
        mask = np.ones(len(idx), dtype=bool)
        for u in self.mediators:
            mask &= ((idx >> u) & 1) == 0
        return mask

    def p_indices(self) -> np.ndarray:
        return np.nonzero(self.p_mask())[0]

    def q_indices(self) -> np.ndarray:
        return np.nonzero(~self.p_mask())[0]

    def projector_matrix(self) -> np.ndarray:
        return np.diag(self.p_mask().astype(complex))


@dataclass
class BlockDecomposition:
    """P/Q sub-blocks of a matrix and their spectral norms."""

    pp: np.ndarray
    pq: np.ndarray
    qp: np.ndarray
    qq: np.ndarray
    norm_pp: float
    norm_pq: float
    norm_qp: float
    norm_qq: float


def block_extract(m: DenseOperator | np.ndarray, split: ProjectorSplit) -> BlockDecomposition:
    mat = m.entries if isinstance(m, DenseOperator) else np.asarray(m)
    if mat.shape[0] != 2**split.n_qubits:
        raise ValueError("matrix dimension does not match split register")
    p = split.p_indices()
    q = split.q_indices()
    pp = mat[np.ix_(p, p)]
    pq = mat[np.ix_(p, q)]
    qp = mat[np.ix_(q, p)]
    qq = mat[np.ix_(q, q)]

    def norm2(a: np.ndarray) -> float:
        if a.size == 0:
            return 0.0
        return float(np.linalg.norm(a, 2))

    return BlockDecomposition(
        pp=pp, pq=pq, qp=qp, qq=qq,
        norm_pp=norm2(pp), norm_pq=norm2(pq), norm_qp=norm2(qp), norm_qq=norm2(qq),
    )


@dataclass
class GroundStateResult:
    """Minimal eigenvalue with solver provenance and eigenpair residual."""

    energy: float
    residual: float
    method: str
    n_qubits: int = field(default=0)


def ground_energy(
    h: PauliSum,
    n_qubits: int,
    dense_cap: int = DEFAULT_ENERGY_DENSE_CAP,
    iterative_cap: int = DEFAULT_ITERATIVE_CAP,
    max_iter: int = DEFAULT_MAX_ITER,
) -> GroundStateResult:
    """Minimal eigenvalue of a Hermitian sum.

    Dense eigendecomposition for n_qubits <= dense_cap, otherwise Lanczos
    on the sparse realization with a deterministic start vector.  Raises
    ConvergenceError when the iterative route stalls or when the eigenpair
    residual exceeds 1e-8 relative to the coefficient scale.
    """
    if h.antiherm:
        raise ValueError("ground energy requires a Hermitian sum")
    if n_qubits > iterative_cap:
        raise ValueError(f"{n_qubits} qubits exceeds iterative cap {iterative_cap}")
    support = h.support
    if support and support[-1] >= n_qubits:
        raise ValueError("register smaller than operator support")
    scale = _coefficient_scale(h)
    if n_qubits <= dense_cap:
        mat = to_matrix(h, n_qubits, dense_cap=max(dense_cap, DEFAULT_DENSE_CAP)).entries
        if np.abs(mat.imag).max(initial=0.0) == 0.0:
            mat = mat.real
        vals, vecs = np.linalg.eigh(mat)
        energy = float(vals[0])
        vec = vecs[:, 0]
        residual = float(np.linalg.norm(mat @ vec - energy * vec))
        method = "dense"
    else:
        mat = to_sparse(h, n_qubits)
        if mat.nnz == 0 or np.abs(mat.imag).max() == 0.0:
            mat = mat.real
        dim = mat.shape[0]
        v0 = np.random.default_rng(7).standard_normal(dim)
        try:
            vals, vecs = spla.eigsh(
                mat, k=1, which="SA", v0=v0,
                maxiter=max_iter, ncv=min(dim - 1, 64), tol=1e-12,
            )
        except spla.ArpackNoConvergence as exc:
            raise ConvergenceError(
                f"Lanczos did not converge within {max_iter} iterations"
            ) from exc
        energy = float(vals[0])
        vec = vecs[:, 0]
        residual = float(np.linalg.norm(mat @ vec - energy * vec))
        method = "iterative"
    if residual > _RESIDUAL_TOL * scale:
        raise ConvergenceError(
            f"eigenpair residual {residual:.3e} exceeds tolerance at scale {scale:.3e}"
        )
    return GroundStateResult(energy=energy, residual=residual, method=method, n_qubits=n_qubits)


def conjugate_by_exp(
    s: PauliSum,
    h: PauliSum,
    n_qubits: int,
    dense_cap: int = DEFAULT_DENSE_CAP,
) -> DenseOperator:
    """Dense e^S H e^{-S} for an anti-Hermitian generator S.

    S enters in stored form (Hermitian sum M with S = 1j*M); the unitary is
    built from the eigendecomposition of M, and unitarity is verified to
    1e-10 before conjugating.
    """
    h_mat = to_matrix(h, n_qubits, dense_cap=dense_cap).entries
    if s.is_zero():
        return DenseOperator(entries=h_mat, hermitian=not h.antiherm)
    if not s.antiherm:
        raise ValueError("generator must carry the anti-Hermitian flag")
    m = to_matrix(
        PauliSum({t.string: t.coefficient for t in s.terms}, s.offset),
        n_qubits,
        dense_cap=dense_cap,
    ).entries
    s_mat = 1j * m
    if np.abs(s_mat + s_mat.conj().T).max() > 1e-10:
        raise ValueError("generator fails the anti-Hermiticity check")
    vals, vecs = np.linalg.eigh(m)
    u = (vecs * np.exp(1j * vals)) @ vecs.conj().T
    unitarity = np.abs(u @ u.conj().T - np.eye(u.shape[0])).max()
    if unitarity > 1e-10:
        raise ValueError(f"exponential lost unitarity ({unitarity:.3e})")
    out = u @ h_mat @ u.conj().T
    return DenseOperator(entries=out, hermitian=not h.antiherm)


def pauli_decompose(mat: np.ndarray, n_qubits: int) -> dict[PauliString, complex]:
    """Exact complex Pauli coefficients of a 2^n x 2^n matrix.

    Quadrant recursion on the most significant qubit; cost O(4^n * n).
    Coefficients below 1e-14 of the largest magnitude are dropped.
    """
    if mat.shape != (2**n_qubits, 2**n_qubits):
        raise ValueError("matrix shape does not match qubit count")

    def recurse(block: np.ndarray, nq: int) -> dict[tuple[tuple[int, str], ...], complex]:
        if nq == 0:
            return {(): complex(block[0, 0])}
        half = 2 ** (nq - 1)
        b00 = block[:half, :half]
        b01 = block[:half, half:]
        b10 = block[half:, :half]
        b11 = block[half:, half:]
        pieces = {
            "I": (b00 + b11) / 2.0,
            "Z": (b00 - b11) / 2.0,
            "X": (b01 + b10) / 2.0,
            "Y": (1j * (b01 - b10)) / 2.0,
        }
        out: dict[tuple[tuple[int, str], ...], complex] = {}
        for letter, piece in pieces.items():
            if not np.any(piece):
                continue
            for suffix, coeff in recurse(piece, nq - 1).items():
                if letter == "I":
                    key = suffix
                else:
                    key = suffix + ((nq - 1, letter),)
                out[key] = out.get(key, 0.0) + coeff
        return out

    raw = recurse(np.asarray(mat, dtype=complex), n_qubits)
    if not raw:
        return {}
    cutoff = 1e-14 * max(abs(c) for c in raw.values())
    return {
        PauliString(key): c for key, c in raw.items() if abs(c) > cutoff
    }


def matrix_to_pauli_sum(mat: np.ndarray, n_qubits: int) -> PauliSum:
    """Pauli expansion of a matrix that is Hermitian or anti-Hermitian."""
    coeffs = pauli_decompose(mat, n_qubits)
    if not coeffs:
        return PauliSum.zero()
    real_mass = sum(abs(c.real) for c in coeffs.values())
    imag_mass = sum(abs(c.imag) for c in coeffs.values())
    scale = max(real_mass, imag_mass)
    if imag_mass <= 1e-12 * scale:
        return PauliSum([(c.real, s) for s, c in coeffs.items()])
    if real_mass <= 1e-12 * scale:
        return PauliSum([(c.imag, s) for s, c in coeffs.items()], antiherm=True)
    raise ValueError("matrix is neither Hermitian nor anti-Hermitian")
