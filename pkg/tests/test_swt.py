"""Rotation generators: perturbative, closed-form, and exact."""

import numpy as np
import pytest

from gadgetlab import (
    PauliString,
    PauliSum,
    ProjectorSplit,
    block_extract,
    block_split,
    commutator,
    conjugate_by_exp,
    effective_hamiltonian,
    gadget_split,
    l0_inverse,
    operator_norm_local,
    parse_hamiltonian,
    sw_exact,
    sw_gadget_closed_form,
    sw_perturbative,
    to_matrix,
)
from gadgetlab.bounds import random_pauli_sum
from gadgetlab.gadgets import factorize_term, subdivision_gadget, three_to_two_gadget
from gadgetlab.swt import SWGenerator

from conftest import oracle_matrix


def penalty(u, delta):
    return PauliSum(
        [(-delta / 2.0, PauliString(((u, "Z"),)))], offset=delta / 2.0
    )


def term_of(text):
    return parse_hamiltonian(text).terms[0]


class TestL0Inverse:
    def test_single_x_coupling(self):
        # [h0, s] = x with h0 = 10 |1><1| and x = 3 X0: s is the stored
        # form of (3/10) * (-i) Y0 ... i.e. -0.3 Y0 with the flag set
        h0 = penalty(0, 10.0)
        x = PauliSum([(3.0, PauliString(((0, "X"),)))])
        s = l0_inverse(h0, x)
        assert s.antiherm
        assert s.coefficient(PauliString(((0, "Y"),))) == pytest.approx(-0.3)

    def test_defining_equation_dense(self, rng):
        # verify [h0, S] = x as matrices for random one-mediator inputs
        h0 = penalty(2, 7.0)
        for _ in range(20):
            body = random_pauli_sum(rng, 2, 3)
            if body.is_zero():
                continue
            x = body.times(PauliSum([(1.0, PauliString(((2, "X"),)))]))
            s = l0_inverse(h0, x)
            hm = oracle_matrix(h0, 3)
            sm = oracle_matrix(s, 3)
            xm = oracle_matrix(x, 3)
            assert np.allclose(hm @ sm - sm @ hm, xm, atol=1e-12)

    def test_block_diagonal_rejected(self):
        h0 = penalty(1, 5.0)
        with pytest.raises(ValueError, match="block-diagonal"):
            l0_inverse(h0, PauliSum([(1.0, PauliString(((0, "X"),)))]))

    def test_double_flip_rejected(self):
        h0 = penalty(0, 5.0) + penalty(1, 5.0)
        x = PauliSum([(1.0, PauliString(((0, "X"), (1, "X"))))])
        with pytest.raises(ValueError, match="cross-block"):
            l0_inverse(h0, x)

    def test_penalty_form_validated(self):
        bad = PauliSum([(1.0, PauliString(((0, "X"),)))])
        with pytest.raises(ValueError, match="single-qubit Z"):
            l0_inverse(bad, PauliSum([(1.0, PauliString(((0, "X"),)))]))

    def test_antiherm_input_maps_back(self):
        # anti-Hermitian x (stored c Y_u) inverts to Hermitian s
        h0 = penalty(0, 4.0)
        x = PauliSum([(2.0, PauliString(((0, "Y"),)))], antiherm=True)
        s = l0_inverse(h0, x)
        assert not s.antiherm
        hm = oracle_matrix(h0, 1)
        sm = oracle_matrix(s, 1)
        assert np.allclose(hm @ sm - sm @ hm, oracle_matrix(x, 1), atol=1e-12)


class TestBlockSplit:
    def test_mediator_flip_detection(self):
        split = ProjectorSplit(n_qubits=3, mediators=(2,))
        v = parse_hamiltonian("1.0 X0 X2\n2.0 Z0 Z2\n3.0 Z1\n4.0 Y2")
        v_d, v_od = block_split(v, split)
        assert v_od.n_terms == 2
        assert v_d.n_terms == 2
        assert v_d.coefficient(PauliString(((0, "Z"), (2, "Z")))) == 2.0

    def test_multi_mediator_rejected(self):
        split = ProjectorSplit(n_qubits=3, mediators=(1, 2))
        with pytest.raises(ValueError, match="single-mediator"):
            block_split(PauliSum.zero(), split)


class TestPerturbative:
    def test_first_order_cancels_offdiagonal(self):
        # e^S (H0 + V) e^-S has no PQ block through first order:
        # as matrices, [S1, H0] + V_od = 0
        t = term_of("1.0 Z0 Z1 Z2 Z3")
        g = subdivision_gadget(factorize_term(t, 2), 0.5, delta=50.0)
        split = gadget_split(g, 5)
        gen = sw_perturbative(g.h0, g.v(), split, order=1)
        s_m = oracle_matrix(gen.s, 5)
        h0_m = oracle_matrix(g.h0, 5)
        vod_m = oracle_matrix(g.v_od, 5)
        assert np.allclose(s_m @ h0_m - h0_m @ s_m + vod_m, 0.0, atol=1e-10)

    def test_order_validation(self):
        t = term_of("1.0 Z0 Z1 Z2 Z3")
        g = subdivision_gadget(factorize_term(t, 2), 0.5)
        with pytest.raises(ValueError, match="order"):
            sw_perturbative(g.h0, g.v(), gadget_split(g, 5), order=4)

    def test_zero_offdiagonal_gives_zero_generator(self):
        h0 = penalty(1, 5.0)
        v = PauliSum([(1.0, PauliString(((0, "Z"),)))])
        gen = sw_perturbative(h0, v, ProjectorSplit(n_qubits=2, mediators=(1,)), order=3)
        assert gen.s.is_zero()

    def test_generator_is_offdiagonal(self, rng):
        t = term_of("-0.8 X0 Y1 Z2")
        g = three_to_two_gadget(factorize_term(t, 3), 0.3)
        gen = sw_perturbative(g.h0, g.v(), gadget_split(g, 4), order=3)
        for term in gen.s.terms:
            assert term.string.letter(g.mediator) in ("X", "Y")


class TestClosedForms:
    @pytest.mark.parametrize("text", ["1.0 Z0 Z1 Z2 Z3", "-0.7 X0 Y1 Z2 X3", "0.3 Z0 X1 Y2 Z3 Z4"])
    def test_subdivision_matches_perturbative(self, text):
        g = subdivision_gadget(factorize_term(term_of(text), 2), 0.25)
        n = max(g.hamiltonian().support) + 1
        closed = sw_gadget_closed_form(g, n)
        pert = sw_perturbative(g.h0, g.v(), gadget_split(g, n), order=1)
        assert closed.s.allclose(pert.s)

    @pytest.mark.parametrize("text", ["1.0 Z0 Z1 Z2", "-0.4 X0 Y1 Z2", "0.9 Y0 Y1 Y2"])
    def test_three_to_two_matches_perturbative(self, text):
        g = three_to_two_gadget(factorize_term(term_of(text), 3), 0.2)
        n = max(g.hamiltonian().support) + 1
        closed = sw_gadget_closed_form(g, n)
        pert = sw_perturbative(g.h0, g.v(), gadget_split(g, n), order=3)
        assert closed.s.allclose(pert.s)

    def test_subdivision_coefficient_value(self):
        # stored generator is -sqrt(J / (2 gap)) Y_u (B - A)
        g = subdivision_gadget(factorize_term(term_of("1.0 Z0 Z1 Z2 Z3"), 2), 0.5, delta=100.0)
        closed = sw_gadget_closed_form(g, 5)
        c = np.sqrt(1.0 / 200.0)
        assert closed.s.coefficient(PauliString(((2, "Z"), (3, "Z"), (4, "Y")))) == pytest.approx(-c)
        assert closed.s.coefficient(PauliString(((0, "Z"), (1, "Z"), (4, "Y")))) == pytest.approx(c)


class TestExact:
    def test_rotation_block_diagonalizes(self, rng):
        # gap 10, perturbation scale 0.1: the exact generator must leave
        # no PQ block at all
        h0 = penalty(2, 10.0)
        v = random_pauli_sum(rng, 3, 4, coeff_scale=0.1)
        h = h0 + v
        split = ProjectorSplit(n_qubits=3, mediators=(2,))
        gen = sw_exact(h, split)
        rotated = conjugate_by_exp(gen.s, h, 3).entries
        assert block_extract(rotated, split).norm_pq < 1e-9

    def test_spectrum_preserved_on_low_block(self, rng):
        h0 = penalty(2, 10.0)
        v = random_pauli_sum(rng, 3, 4, coeff_scale=0.1)
        h = h0 + v
        split = ProjectorSplit(n_qubits=3, mediators=(2,))
        gen = sw_exact(h, split)
        eff = effective_hamiltonian(h, gen)
        low = np.sort(np.linalg.eigvalsh(eff.h_eff.entries))
        full = np.sort(np.linalg.eigvalsh(to_matrix(h, 3).entries))[: split.rank_p]
        assert np.allclose(low, full, atol=1e-9)

    def test_block_diagonal_input_gives_zero(self):
        h = penalty(1, 5.0) + PauliSum([(0.3, PauliString(((0, "X"),)))])
        gen = sw_exact(h, ProjectorSplit(n_qubits=2, mediators=(1,)))
        assert gen.s.is_zero()

    def test_gapless_cut_rejected(self):
        # no spectral gap separates rank(P) = 2 levels of X0 + X1
        h = parse_hamiltonian("1.0 X0\n1.0 X1")
        with pytest.raises(ValueError, match="gap"):
            sw_exact(h, ProjectorSplit(n_qubits=2, mediators=(1,)))

    @pytest.mark.parametrize("j,delta", [(0.7, 17.5), (1.0, 100.0), (2.0, 128.0)])
    def test_exact_near_first_order_subdivision(self, j, delta):
        # frozen envelope: |S_exact - S_1| <= J / gap (measured 0.19..0.64 J/gap)
        t = term_of(f"{j} Z0 Z1 X2 X3")
        g = subdivision_gadget(factorize_term(t, 2), 0.5, delta=delta)
        gen = sw_exact(g.hamiltonian(), gadget_split(g, 5))
        closed = sw_gadget_closed_form(g, 5)
        assert operator_norm_local(gen.s - closed.s) <= j / delta

    @pytest.mark.parametrize("j,delta", [(1.0, 125.0), (1.0, 1000.0), (0.5, 512.0)])
    def test_exact_near_closed_form_three_to_two(self, j, delta):
        # frozen envelope: |S_exact - S_closed| <= 12 x^4 (measured 8.0..9.6 x^4)
        t = term_of(f"{j} X0 Y1 Z2")
        g = three_to_two_gadget(factorize_term(t, 3), 0.5, delta=delta)
        gen = sw_exact(g.hamiltonian(), gadget_split(g, 4))
        closed = sw_gadget_closed_form(g, 4)
        assert operator_norm_local(gen.s - closed.s) <= 12.0 * g.x**4


class TestEffectiveHamiltonian:
    def test_exact_generator_leaves_no_residual(self, rng):
        h0 = penalty(3, 20.0)
        v = random_pauli_sum(rng, 4, 5, coeff_scale=0.2)
        h = h0 + v
        gen = sw_exact(h, ProjectorSplit(n_qubits=4, mediators=(3,)))
        eff = effective_hamiltonian(h, gen)
        assert eff.offdiag_residual <= 1e-10
        assert eff.truncation_error_bound == 0.0

    def test_truncation_bound_dominates_remainder(self):
        # third-order remainder of the closed-form rotation obeys
        # |P (e^S H e^-S - sum_{p<3} L^p/p!) P| <= |P L^3 P|/6 + |L^4|/24
        t = term_of("1.0 Z0 Z1 Z2")
        g = three_to_two_gadget(factorize_term(t, 3), 0.2)
        n = 4
        gen = sw_gadget_closed_form(g, n)
        h = g.hamiltonian()
        eff = effective_hamiltonian(h, gen)
        split = gadget_split(g, n)
        rotated = conjugate_by_exp(gen.s, h, n).entries
        partial = np.zeros_like(rotated)
        term = h
        fact = 1.0
        for p in range(3):
            if p > 0:
                term = commutator(gen.s, term)
                fact *= p
            partial = partial + to_matrix(term, n).entries / fact
        measured = block_extract(rotated - partial, split).norm_pp
        assert measured <= eff.truncation_error_bound + 1e-9

    def test_closed_form_residual_decreases_with_eps(self):
        t = term_of("1.0 Z0 Z1 Z2")
        residuals = []
        for eps in (0.1, 0.05):
            g = three_to_two_gadget(factorize_term(t, 3), eps)
            gen = sw_gadget_closed_form(g, 4)
            eff = effective_hamiltonian(g.hamiltonian(), gen)
            residuals.append(eff.offdiag_residual)
        assert residuals[1] < residuals[0]

    def test_effective_block_approximates_target(self):
        # low block of the rotated subdivision gadget reproduces the
        # 4-body term up to the compensating-order error
        t = term_of("1.0 Z0 Z1 Z2 Z3")
        g = subdivision_gadget(factorize_term(t, 2), 0.1)
        gen = sw_gadget_closed_form(g, 5)
        eff = effective_hamiltonian(g.hamiltonian(), gen)
        target = to_matrix(parse_hamiltonian("1.0 Z0 Z1 Z2 Z3"), 4).entries
        err = np.linalg.norm(eff.h_eff.entries - target, 2)
        assert err <= 4.5 * 0.1**2  # measured 4 eps^2 J envelope


class TestGeneratorContract:
    def test_unflagged_generator_rejected(self):
        with pytest.raises(ValueError, match="anti-Hermitian"):
            SWGenerator(
                s=PauliSum([(1.0, PauliString(((0, "X"),)))]),
                order=1,
                split=ProjectorSplit(n_qubits=1, mediators=(0,)),
            )

    def test_zero_generator_allowed(self):
        gen = SWGenerator(
            s=PauliSum.zero(),
            order=1,
            split=ProjectorSplit(n_qubits=1, mediators=(0,)),
        )
        assert gen.s.is_zero()
