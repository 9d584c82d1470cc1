"""Mediator-qubit gadget compiler.

Two constructions reduce locality at the cost of a large penalty gap Delta
on a fresh mediator qubit u:

* subdivision: a k-local term J*A*B (A, B on disjoint halves of the support)
  becomes Delta|1><1|_u + sqrt(Delta*J/2) X_u (B - A) + (J/2)(A^2 + B^2),
  leaving (ceil(k/2)+1)-local terms.  Gap choice Delta = J * eps^-2.
* three-to-two: a 3-local term J*A*B*C (single-qubit factors) becomes
  2-local with a diagonal coupling to C, an X_u transition coupling to
  (B - A) and the compensating 2-local extra terms.  Gap choice
  Delta = J * eps^-3, transition scale x = (J/Delta)^(1/3).

The coefficient sign is absorbed into factor A, so J is always positive.
Multi-level reduction iterates subdivision until every term is at most
3-local and finishes with one three-to-two level.  The recorded schedule
tracks the strength recursion J_{i+1} = J_i^3 / delta^2 for the per-level
error budget delta; the gaps actually installed are set from the largest
coefficient among the terms being gadgetized at that level, which keeps
every installed coefficient small enough to certify by diagonalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .pauli import (
    PauliString,
    PauliSum,
    PauliTerm,
    locality_profile,
    serialize_hamiltonian,
)

__all__ = [
    "FactorizedInteraction",
    "GadgetInstance",
    "SimulatorHamiltonian",
    "LevelRecord",
    "LevelSchedule",
    "factorize_term",
    "subdivision_gadget",
    "three_to_two_gadget",
    "assemble_simulator",
    "reduce_to_two_local",
    "serialize_compiled",
    "GADGET_KINDS",
]

GADGET_KINDS = ("subdivision", "three-to-two")


@dataclass(frozen=True)
class FactorizedInteraction:
    """Strength J > 0 and pairwise-disjoint unit-norm factors.

    The product J * factor_0 * ... * factor_{r-1} reproduces the source
    term exactly; the source coefficient's sign lives in factor 0.
    """

    j: float
    factors: tuple[PauliSum, ...]

    def __post_init__(self) -> None:
        if self.j <= 0.0:
            raise ValueError("interaction strength must be positive")
        seen: set[int] = set()
        for f in self.factors:
            sup = set(f.support)
            if not sup:
                raise ValueError("factor without support")
            if seen & sup:
                raise ValueError("factors must act on disjoint qubits")
            seen |= sup

    def term(self) -> PauliSum:
        out = PauliSum.identity(self.j)
        for f in self.factors:
            out = out.times(f)
        return out

    @property
    def support(self) -> tuple[int, ...]:
        qubits: list[int] = []
        for f in self.factors:
            qubits.extend(f.support)
        return tuple(sorted(qubits))


def factorize_term(term: PauliTerm, n_factors: int | None = None) -> FactorizedInteraction:
    """Split a k-local string term (k >= 3) into disjoint unit factors.

    Two-way splits put the first ceil(k/2) support qubits into A; three-way
    splits (k = 3 only) give one letter per factor.  The sign of the
    coefficient is absorbed into A.
    """
    k = term.string.weight
    if k < 3:
        raise ValueError(f"term is {k}-local; nothing to factorize")
    if term.coefficient == 0.0:
        raise ValueError("zero-coefficient term")
    if n_factors is None:
        n_factors = 3 if k == 3 else 2
    if n_factors == 3 and k != 3:
        raise ValueError("three-way split requires an exactly 3-local term")
    if n_factors not in (2, 3):
        raise ValueError("factor count must be 2 or 3")
    letters = term.string.letters
    sign = 1.0 if term.coefficient > 0 else -1.0
    if n_factors == 2:
        cut = math.ceil(k / 2)
        groups = [letters[:cut], letters[cut:]]
    else:
        groups = [letters[0:1], letters[1:2], letters[2:3]]
    factors = [
        PauliSum.from_term(sign if i == 0 else 1.0, PauliString(tuple(group)))
        for i, group in enumerate(groups)
    ]
    return FactorizedInteraction(j=abs(term.coefficient), factors=tuple(factors))


@dataclass
class GadgetInstance:
    """One mediator gadget: penalty, couplings and compensating terms.

    The full gadget Hamiltonian is h0 + v_d + v_od + v_extra.  ``x`` is the
    three-to-two transition scale (J/Delta)^(1/3) and is zero for
    subdivision gadgets.
    """

    kind: str
    mediator: int
    delta: float
    h0: PauliSum
    v_d: PauliSum
    v_od: PauliSum
    v_extra: PauliSum
    x: float
    source: FactorizedInteraction

    @property
    def j(self) -> float:
        return self.source.j

    def v(self) -> PauliSum:
        return self.v_d + self.v_od + self.v_extra

    def hamiltonian(self) -> PauliSum:
        return self.h0 + self.v()

    def target_term(self) -> PauliSum:
        return self.source.term()


def _penalty(mediator: int, delta: float) -> PauliSum:
    # Delta |1><1|_u = Delta/2 (I - Z_u)
    return PauliSum.from_letter(mediator, "Z", -delta / 2.0) + PauliSum.identity(delta / 2.0)


def _check_eps(eps: float) -> None:
    if not (0.0 < eps < 1.0):
        raise ValueError(f"eps must lie in (0, 1), got {eps}")


def _check_mediator(mediator: int, source: FactorizedInteraction) -> None:
    if mediator in source.support:
        raise ValueError(f"mediator {mediator} collides with factor support")


def subdivision_gadget(
    f: FactorizedInteraction,
    eps: float,
    mediator: int | None = None,
    delta: float | None = None,
) -> GadgetInstance:
    """Halve the locality of J*A*B using one mediator qubit."""
    _check_eps(eps)
    if len(f.factors) != 2:
        raise ValueError("subdivision needs exactly two factors")
    a, b = f.factors
    j = f.j
    if delta is None:
        delta = j * eps**-2
    if delta <= j:
        raise ValueError("gap must exceed the interaction strength")
    u = mediator if mediator is not None else max(f.support) + 1
    _check_mediator(u, f)
    b_minus_a = b - a
    x_u = PauliSum.from_letter(u, "X")
    v_od = math.sqrt(delta * j / 2.0) * x_u.times(b_minus_a)
    v_extra = (j / 2.0) * (a.times(a) + b.times(b))
    return GadgetInstance(
        kind="subdivision",
        mediator=u,
        delta=delta,
        h0=_penalty(u, delta),
        v_d=PauliSum.zero(),
        v_od=v_od,
        v_extra=v_extra,
        x=0.0,
        source=f,
    )


def three_to_two_gadget(
    f: FactorizedInteraction,
    eps: float,
    mediator: int | None = None,
    delta: float | None = None,
) -> GadgetInstance:
    """Reduce a 3-local J*A*B*C (single-qubit factors) to 2-local form."""
    _check_eps(eps)
    if len(f.factors) != 3:
        raise ValueError("three-to-two needs exactly three factors")
    for factor in f.factors:
        if len(factor.support) != 1:
            raise ValueError("three-to-two factors must be single-qubit")
    a, b, c = f.factors
    j = f.j
    if delta is None:
        delta = j * eps**-3
    if delta <= j:
        raise ValueError("gap must exceed the interaction strength")
    u = mediator if mediator is not None else max(f.support) + 1
    _check_mediator(u, f)
    x = (j / delta) ** (1.0 / 3.0)
    coupling = delta ** (2.0 / 3.0) * j ** (1.0 / 3.0)
    b_minus_a = b - a
    x_u = PauliSum.from_letter(u, "X")
    one_one_u = PauliSum.from_letter(u, "Z", -0.5) + PauliSum.identity(0.5)
    v_d = -coupling * one_one_u.times(c)
    v_od = (coupling / math.sqrt(2.0)) * x_u.times(b_minus_a)
    v_extra = (
        0.5 * delta ** (1.0 / 3.0) * j ** (2.0 / 3.0) * b_minus_a.times(b_minus_a)
        + (j / 2.0) * (a.times(a) + b.times(b)).times(c)
    )
    return GadgetInstance(
        kind="three-to-two",
        mediator=u,
        delta=delta,
        h0=_penalty(u, delta),
        v_d=v_d,
        v_od=v_od,
        v_extra=v_extra,
        x=x,
        source=f,
    )


@dataclass
class SimulatorHamiltonian:
    """Assembled simulator: gadgets, untouched remainder, and bookkeeping."""

    n_system: int
    total_qubits: int
    gadgets: tuple[GadgetInstance, ...]
    h_else: PauliSum
    mediator_registry: dict[int, int]
    assembled: PauliSum

    @property
    def mediators(self) -> tuple[int, ...]:
        return tuple(g.mediator for g in self.gadgets)


def _route_kind(kind: str, k: int, three_local_passthrough: bool = False) -> str | None:
    """Which gadget handles a k-local term, or None for pass-through."""
    if k <= 2:
        return None
    if kind == "subdivision":
        if k == 3 and three_local_passthrough:
            return None
        return "subdivision"
    if kind == "three-to-two":
        if k != 3:
            raise ValueError(f"three-to-two cannot compile a {k}-local term")
        return "three-to-two"
    if kind == "auto":
        return "three-to-two" if k == 3 else "subdivision"
    raise ValueError(f"unknown gadget kind {kind!r}")


def assemble_simulator(
    target: PauliSum,
    eps: float,
    kind: str = "auto",
    delta: float | None = None,
    n_system: int | None = None,
    three_local_passthrough: bool = False,
) -> SimulatorHamiltonian:
    """Compile one gadget level: one mediator per gadgetizable term.

    Mediators are allocated in normalized term order starting right above
    the system register.  Terms of locality <= 2 and the identity offset
    pass through unchanged.  ``delta`` overrides the per-term gap choice
    (used by gap sweeps and by the multi-level scheduler).
    """
    _check_eps(eps)
    if target.antiherm:
        raise ValueError("target must be Hermitian")
    support = target.support
    inferred = (support[-1] + 1) if support else 0
    if n_system is None:
        n_system = inferred
    elif n_system < inferred:
        raise ValueError("declared system size smaller than target support")
    gadgets: list[GadgetInstance] = []
    registry: dict[int, int] = {}
    h_else = PauliSum.identity(target.offset)
    assembled = PauliSum.identity(target.offset)
    next_mediator = n_system
    for term in target.terms:
        route = _route_kind(kind, term.string.weight, three_local_passthrough)
        if route is None:
            passthrough = PauliSum.from_term(term.coefficient, term.string)
            h_else = h_else + passthrough
            assembled = assembled + passthrough
            continue
        if route == "subdivision":
            f = factorize_term(term, n_factors=2)
            g = subdivision_gadget(f, eps, mediator=next_mediator, delta=delta)
        else:
            f = factorize_term(term, n_factors=3)
            g = three_to_two_gadget(f, eps, mediator=next_mediator, delta=delta)
        registry[len(gadgets)] = next_mediator
        gadgets.append(g)
        assembled = assembled + g.hamiltonian()
        next_mediator += 1
    return SimulatorHamiltonian(
        n_system=n_system,
        total_qubits=next_mediator,
        gadgets=tuple(gadgets),
        h_else=h_else,
        mediator_registry=registry,
        assembled=assembled,
    )


@dataclass(frozen=True)
class LevelRecord:
    """One reduction level.

    ``j`` follows the bookkeeping recursion J_{i+1} = J_i^3 / delta^2 that
    prices the worst-case strength growth; ``j_gadget`` is the largest
    coefficient actually handed to a gadget, and ``gap`` the penalty
    installed from it.
    """

    kind: str
    j: float
    j_gadget: float
    delta: float
    eps: float
    gap: float
    mediator_start: int
    mediator_stop: int

    @property
    def n_gadgets(self) -> int:
        return self.mediator_stop - self.mediator_start


@dataclass
class LevelSchedule:
    levels: tuple[LevelRecord, ...]
    final_strength: float

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    @property
    def total_mediators(self) -> int:
        return sum(rec.n_gadgets for rec in self.levels)


def _predict_levels(k: int) -> int:
    """Levels needed to reach 2-local: subdivisions to 3-local, then one more."""
    if k <= 2:
        return 0
    count = 0
    while k > 3:
        k = math.ceil(k / 2) + 1
        count += 1
    return count + 1


def _max_coefficient(h: PauliSum, predicate) -> float:
    best = 0.0
    for term in h.terms:
        if predicate(term.string.weight):
            best = max(best, abs(term.coefficient))
    return best


def reduce_to_two_local(
    target: PauliSum, eps: float
) -> tuple[SimulatorHamiltonian, LevelSchedule]:
    """Iterate gadget levels until the compiled Hamiltonian is 2-local.

    The total error allowance eps*J*n is split evenly: each of the m levels
    gets the absolute budget delta = eps * J_1 * 2^-m, and each level's
    gadgets run at eps_i = delta / J_i^gadget so the per-level error stays
    at delta per gadget.
    """
    _check_eps(eps)
    profile = locality_profile(target)
    n_levels = _predict_levels(profile.k)
    if n_levels == 0:
        sim = assemble_simulator(target, eps, kind="auto")
        return sim, LevelSchedule(levels=(), final_strength=profile.j)
    budget = eps * profile.j * 2.0 ** (-n_levels)
    j_book = profile.j
    current = target
    n_system = current.support[-1] + 1 if current.support else 0
    records: list[LevelRecord] = []
    sim: SimulatorHamiltonian | None = None
    for level in range(n_levels):
        prof = locality_profile(current)
        last = prof.k <= 3
        kind = "three-to-two" if last else "subdivision"
        j_gadget = _max_coefficient(
            current, (lambda k: k == 3) if last else (lambda k: k >= 4)
        )
        if j_gadget == 0.0:
            raise RuntimeError("level scheduled with nothing to gadgetize")
        eps_i = budget / j_gadget
        if not (0.0 < eps_i < 1.0):
            raise ValueError(
                f"per-level budget {budget:.3e} is not below the level strength "
                f"{j_gadget:.3e}; choose a larger eps or rescale the target"
            )
        gap = j_gadget * eps_i ** (-3 if last else -2)
        sim = assemble_simulator(
            current, eps_i, kind=kind, delta=gap, n_system=n_system,
            three_local_passthrough=not last,
        )
        records.append(
            LevelRecord(
                kind=kind,
                j=j_book,
                j_gadget=j_gadget,
                delta=budget,
                eps=eps_i,
                gap=gap,
                mediator_start=n_system,
                mediator_stop=sim.total_qubits,
            )
        )
        j_book = j_book**3 / (budget * budget)
        current = sim.assembled
        n_system = sim.total_qubits
    assert sim is not None
    final_strength = locality_profile(sim.assembled).j
    schedule = LevelSchedule(levels=tuple(records), final_strength=final_strength)
    if locality_profile(sim.assembled).k > 2:
        raise RuntimeError("reduction failed to reach 2-local form")
    return sim, schedule


def serialize_compiled(
    sim: SimulatorHamiltonian,
    schedule: LevelSchedule | None = None,
    eps: float | None = None,
    kind: str | None = None,
) -> str:
    """Text form of the compiled Hamiltonian with bookkeeping headers."""
    header: list[str] = []
    if eps is not None:
        tag = f" kind={kind}" if kind else ""
        header.append(f"compiled eps={eps:.17g}{tag}")
    # After a multi-level reduction sim.n_system is the last level's base
    # register (earlier mediators included); the original target register
    # ends where the first level's mediators start.
    base = (
        schedule.levels[0].mediator_start
        if schedule is not None and schedule.levels
        else sim.n_system
    )
    header.append(
        f"system qubits 0..{base - 1}; total qubits {sim.total_qubits}"
        if base
        else f"total qubits {sim.total_qubits}"
    )
    if schedule is not None and schedule.levels:
        header.append(f"levels={schedule.n_levels}")
        for i, rec in enumerate(schedule.levels, start=1):
            header.append(
                f"level {i}: kind={rec.kind} J={rec.j:.17g} "
                f"J_gadget={rec.j_gadget:.17g} delta={rec.delta:.17g} "
                f"eps={rec.eps:.17g} gap={rec.gap:.17g} "
                f"mediators={rec.mediator_start}..{rec.mediator_stop - 1}"
            )
        header.append(f"final_strength={schedule.final_strength:.17g}")
    elif sim.gadgets:
        meds = ",".join(str(m) for m in sim.mediators)
        header.append(f"levels=1 mediators={meds}")
    header.append(f"identity_offset={sim.assembled.offset:.17g}")
    return serialize_hamiltonian(sim.assembled, header_lines=header)
