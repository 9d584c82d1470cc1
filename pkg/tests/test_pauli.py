"""Pauli algebra against an independent basis-state oracle."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gadgetlab import (
    FormatError,
    PauliString,
    PauliSum,
    commutator,
    embed,
    locality_profile,
    multiply,
    operator_norm_local,
    parse_hamiltonian,
    serialize_hamiltonian,
)

from conftest import oracle_matrix, oracle_norm


def s(*pairs):
    return PauliString(tuple(pairs))


X0, Y0, Z0 = s((0, "X")), s((0, "Y")), s((0, "Z"))


class TestPauliString:
    def test_sorted_and_validated(self):
        with pytest.raises(ValueError):
            PauliString(((1, "X"), (0, "Z")))
        with pytest.raises(ValueError):
            PauliString(((0, "X"), (0, "Z")))
        with pytest.raises(ValueError):
            PauliString(((-1, "X"),))
        with pytest.raises(ValueError):
            PauliString(((0, "Q"),))

    def test_from_map_sorts(self):
        assert PauliString.from_map({3: "Z", 1: "X"}) == s((1, "X"), (3, "Z"))

    def test_str(self):
        assert str(s((0, "X"), (2, "Z"))) == "X0 Z2"
        assert str(PauliString(())) == "I"

    def test_weight_support(self):
        p = s((1, "Y"), (4, "Z"))
        assert p.weight == 2
        assert p.support == (1, 4)
        assert p.letter(4) == "Z"
        assert p.letter(2) == "I"


class TestMultiply:
    # single-qubit table, checked against the defining relations
    @pytest.mark.parametrize(
        "a,b,phase,out",
        [
            ("X", "Y", 1j, "Z"),
            ("Y", "X", -1j, "Z"),
            ("Y", "Z", 1j, "X"),
            ("Z", "Y", -1j, "X"),
            ("Z", "X", 1j, "Y"),
            ("X", "Z", -1j, "Y"),
        ],
    )
    def test_table(self, a, b, phase, out):
        got_phase, got = multiply(s((0, a)), s((0, b)))
        assert got_phase == phase
        assert got == s((0, out))

    def test_squares_to_identity(self):
        for letter in "XYZ":
            phase, out = multiply(s((0, letter)), s((0, letter)))
            assert phase == 1.0
            assert out.is_identity()

    def test_disjoint_merge(self):
        phase, out = multiply(s((0, "X")), s((2, "Z")))
        assert phase == 1.0
        assert out == s((0, "X"), (2, "Z"))

    def test_random_products_match_oracle(self, rng):
        n = 4
        for _ in range(500):
            a = _random_string(rng, n)
            b = _random_string(rng, n)
            phase, out = multiply(a, b)
            lhs = oracle_matrix(PauliSum([(1.0, a)]), n) @ oracle_matrix(
                PauliSum([(1.0, b)]), n
            )
            rhs = phase * oracle_matrix(PauliSum([(1.0, out)]), n)
            assert np.allclose(lhs, rhs, atol=1e-12)


def _random_string(rng, n_qubits):
    weight = int(rng.integers(0, n_qubits + 1))
    if weight == 0:
        return PauliString(())
    qubits = sorted(rng.choice(n_qubits, size=weight, replace=False).tolist())
    letters = rng.choice(("X", "Y", "Z"), size=weight)
    return PauliString(tuple((int(q), str(l)) for q, l in zip(qubits, letters)))


class TestPauliSum:
    def test_merges_duplicates_and_drops_zeros(self):
        h = PauliSum([(1.0, X0), (2.0, X0), (-3.0, X0), (0.5, Z0)])
        assert h.n_terms == 1
        assert h.coefficient(Z0) == 0.5
        assert h.coefficient(X0) == 0.0

    def test_identity_to_offset(self):
        h = PauliSum([(2.0, PauliString(())), (1.0, X0)], offset=0.5)
        assert h.offset == 2.5
        assert h.n_terms == 1

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            PauliSum([(math.inf, X0)])

    def test_flag_mixing_rejected(self):
        a = PauliSum([(1.0, X0)])
        b = PauliSum([(1.0, Z0)], antiherm=True)
        with pytest.raises(ValueError):
            a + b

    def test_zero_sum_compatible_with_either_flag(self):
        z = PauliSum.zero()
        h = PauliSum([(1.0, X0)], antiherm=True)
        assert (z + h).allclose(h)

    def test_arithmetic(self):
        h = PauliSum([(1.0, X0)], offset=1.0)
        g = 2.0 * h - h
        assert g.coefficient(X0) == 1.0
        assert g.offset == 1.0
        assert (-h).offset == -1.0

    def test_times_products(self):
        a = PauliSum([(2.0, X0)])
        b = PauliSum([(3.0, Z0)])
        # X Z = -i Y: anti-Hermitian product, stored form -6 Y0
        prod = a.times(b)
        assert prod.antiherm
        assert prod.coefficient(Y0) == -6.0
        # X (X Z) would mix purities through the offset-free identity part
        assert a.times(a).offset == 4.0

    def test_times_mixed_purity_rejected(self):
        a = PauliSum([(1.0, X0), (1.0, s((1, "X")))])
        b = PauliSum([(1.0, Z0)])
        with pytest.raises(ValueError, match="neither Hermitian nor anti-Hermitian"):
            a.times(b)


class TestCommutator:
    def test_xz_single_qubit(self):
        # [X0, Z0] = -2i Y0: stored Hermitian part is -2 Y0 with the flag set
        out = commutator(PauliSum([(1.0, X0)]), PauliSum([(1.0, Z0)]))
        assert out.antiherm
        assert out.coefficient(Y0) == -2.0
        assert out.n_terms == 1

    def test_commuting_strings_vanish(self):
        out = commutator(PauliSum([(1.0, X0)]), PauliSum([(2.0, X0)]))
        assert out.is_zero()

    def test_offsets_ignored(self):
        out = commutator(PauliSum([(1.0, X0)], offset=5.0), PauliSum([(1.0, Z0)], offset=-2.0))
        assert out.coefficient(Y0) == -2.0

    def test_matches_oracle_dense(self, rng):
        n = 3
        for _ in range(100):
            a = PauliSum([(float(rng.uniform(-1, 1)), _random_string(rng, n)) for _ in range(3)])
            b = PauliSum([(float(rng.uniform(-1, 1)), _random_string(rng, n)) for _ in range(3)])
            out = commutator(a, b)
            lhs = oracle_matrix(a, n) @ oracle_matrix(b, n) - oracle_matrix(b, n) @ oracle_matrix(a, n)
            assert np.allclose(oracle_matrix(out, n), lhs, atol=1e-12)

    def test_flagged_inputs(self):
        a = PauliSum([(1.0, X0)], antiherm=True)  # actual i X0
        b = PauliSum([(1.0, Z0)])
        out = commutator(a, b)
        # [iX, Z] = i(-2i Y) = 2 Y: Hermitian
        assert not out.antiherm
        assert out.coefficient(Y0) == 2.0

    @given(st.integers(0, 2**16 - 1))
    @settings(max_examples=60, deadline=None)
    def test_antisymmetry(self, seed):
        rng = np.random.default_rng(seed)
        a = PauliSum([(float(rng.uniform(-1, 1)), _random_string(rng, 3)) for _ in range(2)])
        b = PauliSum([(float(rng.uniform(-1, 1)), _random_string(rng, 3)) for _ in range(2)])
        assert commutator(a, b).allclose(-commutator(b, a))

    @given(st.integers(0, 2**16 - 1))
    @settings(max_examples=40, deadline=None)
    def test_jacobi(self, seed):
        rng = np.random.default_rng(seed)
        terms = [
            PauliSum([(float(rng.uniform(-1, 1)), _random_string(rng, 3))])
            for _ in range(3)
        ]
        a, b, c = terms
        total = (
            commutator(a, commutator(b, c))
            + commutator(b, commutator(c, a))
            + commutator(c, commutator(a, b))
        )
        assert total.is_zero() or oracle_norm(total, 3) < 1e-10


class TestEmbed:
    def test_relabels(self):
        h = PauliSum([(1.0, s((0, "X"), (1, "Z")))], offset=2.0)
        out = embed(h, {0: 4, 1: 2})
        assert out.coefficient(s((2, "Z"), (4, "X"))) == 1.0
        assert out.offset == 2.0

    def test_injective_required(self):
        h = PauliSum([(1.0, s((0, "X"), (1, "Z")))])
        with pytest.raises(ValueError):
            embed(h, {0: 3, 1: 3})

    def test_map_must_cover_support(self):
        h = PauliSum([(1.0, s((0, "X"), (1, "Z")))])
        with pytest.raises(ValueError):
            embed(h, {0: 3})


class TestLocalityProfile:
    def test_heisenberg_chain(self):
        terms = []
        for i in range(5):
            for letter in "XYZ":
                terms.append((0.5, s((i, letter), (i + 1, letter))))
        h = PauliSum(terms)
        prof = locality_profile(h)
        assert prof.k == 2
        assert prof.m == 6  # interior qubit: two neighbours, three letters each
        assert prof.j == 0.5

    def test_offset_excluded(self):
        prof = locality_profile(PauliSum([(1.0, X0)], offset=100.0))
        assert prof.j == 1.0
        assert prof.k == 1


class TestNorm:
    def test_matches_oracle(self, rng):
        for _ in range(20):
            h = PauliSum(
                [(float(rng.uniform(-1, 1)), _random_string(rng, 4)) for _ in range(4)],
                offset=float(rng.uniform(-1, 1)),
            )
            n = operator_norm_local(h)
            assert n == pytest.approx(oracle_norm(h, 4), abs=1e-10)

    def test_single_term(self):
        assert operator_norm_local(PauliSum([(-3.0, s((0, "X"), (7, "Z")))])) == pytest.approx(3.0)


class TestTextFormat:
    def test_parse_basic(self):
        h = parse_hamiltonian("# comment\n1.5 Z0 Z1\n\n-0.25 X2  # trailing\n2.0 I\n")
        assert h.coefficient(s((0, "Z"), (1, "Z"))) == 1.5
        assert h.coefficient(s((2, "X"))) == -0.25
        assert h.offset == 2.0

    @pytest.mark.parametrize(
        "text,fragment",
        [
            ("abc X0", "line 1: bad coefficient"),
            ("1.0 X0\nnan X1", "line 2: non-finite"),
            ("1.0", "line 1: coefficient without any factor"),
            ("1.0 W0", "line 1: bad factor"),
            ("1.0 X0 Z0", "line 1: duplicate qubit 0"),
            ("1.0 Xa", "line 1: bad factor"),
        ],
    )
    def test_parse_errors(self, text, fragment):
        with pytest.raises(FormatError, match=fragment):
            parse_hamiltonian(text)

    def test_serialize_round_trip_exact(self, rng):
        for _ in range(25):
            h = PauliSum(
                [(float(rng.standard_normal()), _random_string(rng, 5)) for _ in range(6)],
                offset=float(rng.standard_normal()),
            )
            back = parse_hamiltonian(serialize_hamiltonian(h))
            assert back.allclose(h, rtol=0.0, atol=0.0)

    @given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=5))
    @settings(max_examples=60, deadline=None)
    def test_round_trip_arbitrary_coefficients(self, coeffs):
        strings = [s((i, "Z"), (i + 1, "X")) for i in range(len(coeffs))]
        h = PauliSum(list(zip(coeffs, strings)))
        back = parse_hamiltonian(serialize_hamiltonian(h))
        assert back.allclose(h, rtol=0.0, atol=0.0)

    def test_header_lines(self):
        text = serialize_hamiltonian(PauliSum([(1.0, X0)]), header_lines=["meta"])
        assert text.startswith("# meta\n")
