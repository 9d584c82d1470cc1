"""Numerical certification of rotation-remainder and scaling bounds.

Three families of checks:

* Taylor remainders of conjugation: r_k = |e^S H e^{-S} - sum_{p<k} L^p(H)/p!|
  never exceeds |L^k(H)| / k! for anti-Hermitian S (L = [S, .]).
* Extensivity: for local S and H the norm |L^k(H)| grows linearly with
  system size, certified both by dense norms and by summing the norms of
  all elementary nested commutators of single terms.
* Cross-gadget structure: generators of different gadgets interact with
  each other's compensating terms only, and the surviving second-order
  terms stay inside an eps-budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .pauli import (
    PauliString,
    PauliSum,
    commutator,
    locality_profile,
    multiply,
    operator_norm_local,
    _strings_commute,
)
from .spectral import (
    DEFAULT_ENERGY_DENSE_CAP,
    DEFAULT_ITERATIVE_CAP,
    ProjectorSplit,
    conjugate_by_exp,
    ground_energy,
    to_matrix,
)
from .gadgets import GadgetInstance, SimulatorHamiltonian
from .swt import SWGenerator

__all__ = [
    "NESTED_COMMUTATOR_CAP",
    "RemainderReport",
    "ScalingReport",
    "CrossGadgetReport",
    "Lemma1Row",
    "nested_commutator",
    "counting_norm_bound",
    "remainder_r_k",
    "lemma2_scaling",
    "project_low",
    "gadget_eps",
    "cross_gadget_report",
    "operator_inequality_check",
    "random_pauli_sum",
    "random_generator_sum",
    "lemma1_suite",
]

NESTED_COMMUTATOR_CAP = 6


def nested_commutator(s: PauliSum, h: PauliSum, k: int) -> PauliSum:
    """k-fold nested commutator [s, [s, ... [s, h]]] in stored form."""
    if not (0 <= k <= NESTED_COMMUTATOR_CAP):
        raise ValueError(f"order {k} outside 0..{NESTED_COMMUTATOR_CAP}")
    out = h
    for _ in range(k):
        out = commutator(s, out)
    return out


def counting_norm_bound(s: PauliSum, h: PauliSum, k: int) -> float:
    """Upper bound on |L^k(h)| by summing elementary commutator norms.

    Every nested commutator of single Pauli terms is itself a single term
    whose norm is its coefficient magnitude, so the triangle inequality
    gives the bound without building any matrix.
    """
    if not (0 <= k <= NESTED_COMMUTATOR_CAP):
        raise ValueError(f"order {k} outside 0..{NESTED_COMMUTATOR_CAP}")
    clusters: list[tuple[float, PauliString]] = [
        (abs(t.coefficient), t.string) for t in h.terms
    ]
    s_terms = [(abs(t.coefficient), t.string) for t in s.terms]
    for _ in range(k):
        nxt: list[tuple[float, PauliString]] = []
        for cc, cs in clusters:
            for sc, ss in s_terms:
                if _strings_commute(ss, cs):
                    continue
                _, prod = multiply(ss, cs)
                nxt.append((2.0 * sc * cc, prod))
        clusters = nxt
    return float(sum(c for c, _ in clusters))


@dataclass
class RemainderReport:
    """One remainder inequality instance."""

    k: int
    r_k: float
    bound: float
    satisfied: bool
    slack: float


def remainder_r_k(
    s: SWGenerator | PauliSum,
    h: PauliSum,
    k: int,
    n_qubits: int,
    tolerance: float = 1e-9,
) -> RemainderReport:
    """Measure r_k against |L^k(h)|/k! on a dense realization."""
    if not (1 <= k <= NESTED_COMMUTATOR_CAP):
        raise ValueError(f"order {k} outside 1..{NESTED_COMMUTATOR_CAP}")
    gen = s.s if isinstance(s, SWGenerator) else s
    rotated = conjugate_by_exp(gen, h, n_qubits).entries
    partial = np.zeros_like(rotated)
    term = h
    factorial = 1.0
    for p in range(k):
        if p > 0:
            term = commutator(gen, term)
            factorial *= p
        partial = partial + to_matrix(term, n_qubits).entries / factorial
    r_k = float(np.linalg.norm(rotated - partial, 2))
    lk = commutator(gen, term) if k >= 1 else term
    bound = operator_norm_local(lk, support_cap=n_qubits) / math.factorial(k)
    return RemainderReport(
        k=k,
        r_k=r_k,
        bound=bound,
        satisfied=r_k <= bound + tolerance,
        slack=bound - r_k,
    )


@dataclass
class ScalingReport:
    """Norm-versus-size samples with a fitted growth model."""

    k: int
    model: str
    samples: tuple[tuple[int, float], ...]
    ratios: tuple[tuple[int, float], ...]
    counting_samples: tuple[tuple[int, float], ...]
    fitted_slope: float
    fit_residual: float
    bounded: bool


def _fit(ns: Sequence[float], values: Sequence[float], model: str) -> tuple[float, float]:
    xs = np.asarray(ns, dtype=float)
    ys = np.asarray(values, dtype=float)
    if model == "power-law":
        xs, ys = np.log(xs), np.log(ys)
    elif model != "linear-in-n":
        raise ValueError(f"unknown model {model!r}")
    design = np.vstack([xs, np.ones_like(xs)]).T
    coeffs, _, _, _ = np.linalg.lstsq(design, ys, rcond=None)
    resid = float(np.sqrt(np.mean((design @ coeffs - ys) ** 2)))
    return float(coeffs[0]), resid


def lemma2_scaling(
    family: Iterable[tuple[int, PauliSum, PauliSum]],
    k: int,
    model: str = "linear-in-n",
    ratio_tolerance: float = 0.20,
) -> ScalingReport:
    """Certify |L^k(h)| = O(n J_s^k J_h) over a family of sizes.

    ``family`` yields (n, s, h) with at least three distinct sizes.  The
    report carries dense norms, the elementary-commutator counting bound,
    the per-size ratios |L^k| / (n J_s^k J_h), and whether those ratios are
    non-increasing within the tolerance.
    """
    rows = list(family)
    if len({n for n, _, _ in rows}) < 3:
        raise ValueError("need at least three distinct sizes")
    samples: list[tuple[int, float]] = []
    ratios: list[tuple[int, float]] = []
    counting: list[tuple[int, float]] = []
    for n, s, h in rows:
        js = locality_profile(s).j
        jh = locality_profile(h).j
        lk = nested_commutator(s, h, k)
        norm = operator_norm_local(lk, support_cap=max(12, n))
        samples.append((n, norm))
        ratios.append((n, norm / (n * js**k * jh)))
        counting.append((n, counting_norm_bound(s, h, k)))
    slope, resid = _fit([n for n, _ in samples], [v for _, v in samples], model)
    bounded = all(
        ratios[i + 1][1] <= ratios[i][1] * (1.0 + ratio_tolerance)
        for i in range(len(ratios) - 1)
    )
    return ScalingReport(
        k=k,
        model=model,
        samples=tuple(samples),
        ratios=tuple(ratios),
        counting_samples=tuple(counting),
        fitted_slope=slope,
        fit_residual=resid,
        bounded=bounded,
    )


def project_low(op: PauliSum, mediators: Sequence[int]) -> PauliSum:
    """P op P restricted to the all-mediators-|0> sector.

    Terms flipping any mediator vanish; diagonal mediator letters (Z)
    evaluate to +1 and are removed from the string.
    """
    med = set(mediators)
    out: list[tuple[float, PauliString]] = []
    offset = op.offset
    for term in op.terms:
        keep: dict[int, str] = {}
        killed = False
        for q, letter in term.string.letters:
            if q in med:
                if letter in ("X", "Y"):
                    killed = True
                    break
                continue  # Z on |0> contributes +1
            keep[q] = letter
        if killed:
            continue
        if keep:
            out.append((term.coefficient, PauliString.from_map(keep)))
        else:
            offset += term.coefficient
    return PauliSum(out, offset, op.antiherm)


def gadget_eps(g: GadgetInstance) -> float:
    if g.kind == "subdivision":
        return math.sqrt(g.j / g.delta)
    return g.x


@dataclass
class CrossGadgetReport:
    """Pairwise interference accounting for a multi-gadget simulator."""

    n_gadgets: int
    forced_zero_checks: int
    surviving: tuple[tuple[int, int, float], ...] = field(default_factory=tuple)
    total: float = 0.0
    budget: float = 0.0

    @property
    def within_budget(self) -> bool:
        return self.total <= self.budget + 1e-12


def cross_gadget_report(
    sim: SimulatorHamiltonian,
    generators: Sequence[SWGenerator],
) -> CrossGadgetReport:
    """Verify cross-gadget structure and measure the surviving terms.

    Checks, symbolically exact: every generator flips its own mediator and
    touches no other; gadget Hamiltonians avoid foreign mediators (so they
    commute with foreign projectors and penalties); sandwiched first-order
    cross terms P[S^v, H^u]P and mixed second-order terms
    P[S^u1, [S^u2, H^v]]P (u1 != u2) vanish.  What survives is
    P[S^v, [S^v, V_extra^u]]P, reported per ordered pair against the
    per-pair allowance eps_v^2 J_u (subdivision owner u) or
    eps_v^2 J_u / eps_u (three-to-two owner u).
    """
    gadgets = sim.gadgets
    if len(generators) != len(gadgets):
        raise ValueError("one generator per gadget required")
    mediators = [g.mediator for g in gadgets]
    checks = 0
    for g, gen in zip(gadgets, generators):
        for term in gen.s.terms:
            if term.string.letter(g.mediator) not in ("X", "Y"):
                raise ValueError(f"generator for mediator {g.mediator} has a non-flipping term")
            foreign = set(term.string.support) & (set(mediators) - {g.mediator})
            if foreign:
                raise ValueError(f"generator for mediator {g.mediator} touches mediators {foreign}")
        checks += 1
    hams = [g.hamiltonian() for g in gadgets]
    for i, hu in enumerate(hams):
        foreign = set(hu.support) & (set(mediators) - {gadgets[i].mediator})
        if foreign:
            raise ValueError(f"gadget {i} acts on foreign mediators {foreign}")
        checks += 1
    for v, gen_v in enumerate(generators):
        for u, hu in enumerate(hams):
            if u == v:
                continue
            first = project_low(commutator(gen_v.s, hu), mediators)
            if not first.is_zero():
                raise ValueError(f"P[S^{v}, H^{u}]P does not vanish")
            checks += 1
    for u1, gen1 in enumerate(generators):
        for u2, gen2 in enumerate(generators):
            if u1 == u2:
                continue
            for v, hv in enumerate(hams):
                mixed = project_low(
                    commutator(gen1.s, commutator(gen2.s, hv)), mediators
                )
                if not mixed.is_zero():
                    raise ValueError(
                        f"mixed second-order term P[S^{u1},[S^{u2},H^{v}]]P survives"
                    )
                checks += 1
    surviving: list[tuple[int, int, float]] = []
    total = 0.0
    budget = 0.0
    for u, gu in enumerate(gadgets):
        for v, gv in enumerate(gadgets):
            if u == v:
                continue
            gen_v = generators[v]
            term = project_low(
                commutator(gen_v.s, commutator(gen_v.s, gadgets[u].v_extra)),
                mediators,
            )
            norm = 0.0 if term.is_zero() else operator_norm_local(term)
            surviving.append((gu.mediator, gv.mediator, norm))
            total += norm
            eps_v = gadget_eps(gv)
            if gu.kind == "subdivision":
                budget += eps_v**2 * gu.j
            else:
                budget += eps_v**2 * gu.j / gadget_eps(gu)
    return CrossGadgetReport(
        n_gadgets=len(gadgets),
        forced_zero_checks=checks,
        surviving=tuple(surviving),
        total=total,
        budget=budget,
    )


def operator_inequality_check(
    lhs: PauliSum,
    rhs: PauliSum,
    slack: float,
    n_qubits: int,
    dense_cap: int = DEFAULT_ENERGY_DENSE_CAP,
    iterative_cap: int = DEFAULT_ITERATIVE_CAP,
) -> bool:
    """True when lhs >= rhs - slack as quadratic forms."""
    if slack < 0:
        raise ValueError("slack must be non-negative")
    diff = lhs - rhs
    if diff.is_zero():
        return True
    result = ground_energy(
        diff, n_qubits, dense_cap=dense_cap, iterative_cap=iterative_cap
    )
    return result.energy >= -slack


# -- seed-pinned random instances -------------------------------------------


def random_pauli_sum(
    rng: np.random.Generator,
    n_qubits: int,
    n_terms: int,
    coeff_scale: float = 1.0,
    antiherm: bool = False,
) -> PauliSum:
    """Random normalized sum with coefficients uniform in [-scale, scale]."""
    terms: list[tuple[float, PauliString]] = []
    for _ in range(n_terms):
        weight = int(rng.integers(1, n_qubits + 1))
        qubits = sorted(rng.choice(n_qubits, size=weight, replace=False).tolist())
        letters = rng.choice(("X", "Y", "Z"), size=weight)
        string = PauliString(tuple((int(q), str(l)) for q, l in zip(qubits, letters)))
        terms.append((float(rng.uniform(-coeff_scale, coeff_scale)), string))
    return PauliSum(terms, antiherm=antiherm)


def random_generator_sum(
    rng: np.random.Generator,
    n_qubits: int,
    n_terms: int,
    target_norm: float,
) -> PauliSum:
    """Random anti-Hermitian generator rescaled to the requested norm."""
    s = random_pauli_sum(rng, n_qubits, n_terms, antiherm=True)
    while s.is_zero():
        s = random_pauli_sum(rng, n_qubits, n_terms, antiherm=True)
    norm = operator_norm_local(s)
    return s * (target_norm / norm)


@dataclass
class Lemma1Row:
    """One remainder-suite sample for reporting."""

    trial: int
    n_qubits: int
    k: int
    t: float
    r_k: float
    bound: float
    satisfied: bool
    slack: float


def lemma1_suite(
    trials: int,
    seed: int,
    n_qubits: int = 4,
    ks: Sequence[int] = (1, 2, 3, 4),
    ts: Sequence[float] = (1.0,),
    generator_norm: float = 0.3,
) -> list[Lemma1Row]:
    """Remainder inequality over seed-pinned random (S, H) pairs."""
    rng = np.random.default_rng(seed)
    rows: list[Lemma1Row] = []
    for trial in range(trials):
        n = int(rng.integers(2, n_qubits + 1))
        h = random_pauli_sum(rng, n, n_terms=int(rng.integers(2, 6)))
        s = random_generator_sum(rng, n, n_terms=int(rng.integers(1, 4)), target_norm=generator_norm)
        for k in ks:
            for t in ts:
                rep = remainder_r_k(s * t, h, k, n)
                rows.append(
                    Lemma1Row(
                        trial=trial,
                        n_qubits=n,
                        k=k,
                        t=t,
                        r_k=rep.r_k,
                        bound=rep.bound,
                        satisfied=rep.satisfied,
                        slack=rep.slack,
                    )
                )
    return rows
