import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qgenbench.pauli import (PauliDimensionError, PauliString, PauliSum, PauliTerm,
                             UnsupportedGeneratorError, commutes, conjugate_cz,
                             conjugate_cz_sum, conjugate_rotation,
                             expectation_zero_state, multiply, z_substitute)
from qgenbench.statevector import dense_pauli_matrix


def rand_string(rng, n):
    return PauliString(n, int(rng.integers(0, 2**n)), int(rng.integers(0, 2**n)))


def test_multiply_xz():
    phase, r = multiply(PauliString.from_label("X"), PauliString.from_label("Z"))
    assert phase == -1j
    assert r.label() == "Y"


def test_multiply_identity():
    rng = np.random.default_rng(0)
    for _ in range(20):
        p = rand_string(rng, 3)
        phase, r = multiply(PauliString.identity(3), p)
        assert phase == 1 and r == p
        phase, r = multiply(p, p)
        assert phase == 1 and r.is_identity()


def test_multiply_matches_dense():
    rng = np.random.default_rng(1)
    for _ in range(30):
        p, q = rand_string(rng, 2), rand_string(rng, 2)
        phase, r = multiply(p, q)
        dense = dense_pauli_matrix(p) @ dense_pauli_matrix(q)
        assert np.allclose(dense, phase * dense_pauli_matrix(r))


def test_multiply_dimension_mismatch():
    with pytest.raises(PauliDimensionError):
        multiply(PauliString.from_label("X"), PauliString.from_label("XX"))


def test_commutes_trivial():
    assert not commutes(PauliString.from_label("X"), PauliString.from_label("Z"))
    assert commutes(PauliString.from_label("XX"), PauliString.from_label("ZZ"))


def test_commutes_matches_dense():
    rng = np.random.default_rng(2)
    for _ in range(40):
        p, q = rand_string(rng, 6), rand_string(rng, 6)
        a, b = dense_pauli_matrix(p), dense_pauli_matrix(q)
        assert commutes(p, q) == bool(np.allclose(a @ b, b @ a))


@pytest.mark.parametrize("label,expected_sign,expected", [
    ("XI", 1, "XZ"),
    ("ZI", 1, "ZI"),
    ("XX", 1, "YY"),
])
def test_conjugate_cz_rules(label, expected_sign, expected):
    sign, r = conjugate_cz(PauliString.from_label(label), (0, 1))
    assert sign == expected_sign
    assert r.label() == expected


def test_conjugate_cz_matches_dense():
    cz = np.diag([1, 1, 1, -1]).astype(complex)
    rng = np.random.default_rng(3)
    for _ in range(30):
        p = rand_string(rng, 2)
        sign, r = conjugate_cz(p, (0, 1))
        assert np.allclose(cz @ dense_pauli_matrix(p) @ cz,
                           sign * dense_pauli_matrix(r))


def test_conjugate_cz_involution():
    rng = np.random.default_rng(4)
    for _ in range(50):
        p = rand_string(rng, 5)
        s1, q = conjugate_cz(p, (1, 3))
        s2, back = conjugate_cz(q, (1, 3))
        assert back == p and s1 * s2 == 1


def test_z_substitute():
    assert z_substitute(PauliString.from_label("XYI")).label() == "ZZI"
    assert z_substitute(PauliString.from_label("ZZ")).label() == "ZZ"
    assert z_substitute(PauliString.identity(4)).is_identity()


def test_conjugate_rotation_split():
    s = PauliSum.from_label(1.0, "Z")
    out = conjugate_rotation(s, PauliString.from_label("X"), math.pi / 8)
    coeffs = {t.string.label(): (t.coefficient, t.sine_count) for t in out}
    assert coeffs["Z"][0] == pytest.approx(0.7071067812, abs=1e-9)
    assert coeffs["Z"][1] == 0
    assert coeffs["Y"][0] == pytest.approx(0.7071067812, abs=1e-9)
    assert coeffs["Y"][1] == 1


def test_conjugate_rotation_commuting_unchanged():
    s = PauliSum.from_label(1.0, "X")
    out = conjugate_rotation(s, PauliString.from_label("X"), 0.7)
    assert len(out) == 1
    term = next(iter(out))
    assert term.string.label() == "X" and term.coefficient == 1.0


def test_conjugate_rotation_matches_dense():
    rng = np.random.default_rng(5)
    n = 4
    s = PauliSum(n)
    for _ in range(5):
        s.add(PauliTerm(float(rng.normal()), rand_string(rng, n)))
    gen = PauliString.single(n, 2, "Y")
    gamma = 0.3
    out = conjugate_rotation(s, gen, gamma)

    g = dense_pauli_matrix(gen)
    u = np.cos(gamma) * np.eye(2**n) - 1j * np.sin(gamma) * g
    dense_in = sum(t.coefficient * dense_pauli_matrix(t.string) for t in s)
    dense_expected = u.conj().T @ dense_in @ u
    dense_out = sum(t.coefficient * dense_pauli_matrix(t.string) for t in out)
    assert np.allclose(dense_out, dense_expected, atol=1e-12)


def test_conjugate_rotation_bad_generator():
    s = PauliSum.from_label(1.0, "ZZZ")
    with pytest.raises(UnsupportedGeneratorError):
        conjugate_rotation(s, PauliString.from_label("XYZ"), 0.1)


def test_expectation_zero_state():
    assert expectation_zero_state(PauliSum.from_label(1.0, "Z")) == 1.0
    assert expectation_zero_state(PauliSum.from_label(1.0, "X")) == 0.0
    s = PauliSum.from_label(0.5, "ZZ")
    s.add(PauliTerm(0.3, PauliString.from_label("XI")))
    assert expectation_zero_state(s) == pytest.approx(0.5)


def test_norm_and_hermiticity_through_gates():
    rng = np.random.default_rng(6)
    n = 4
    s = PauliSum(n)
    for _ in range(6):
        s.add(PauliTerm(float(rng.normal()), rand_string(rng, n)))
    norm0 = s.l2_norm_sq()
    for step in range(30):
        if rng.random() < 0.5:
            q = int(rng.integers(n))
            gen = PauliString.single(n, q, "XYZ"[int(rng.integers(3))])
            s = conjugate_rotation(s, gen, float(rng.normal(0, 0.4)))
        else:
            a, b = rng.choice(n, 2, replace=False)
            s = conjugate_cz_sum(s, (int(a), int(b)))
        assert s.l2_norm_sq() <= norm0 + 1e-12
        for t in s:
            assert isinstance(t.coefficient, float)


def test_norm_conserved_without_merge_collisions():
    # single-term sums never collide, so conjugation conserves the norm
    rng = np.random.default_rng(16)
    s = PauliSum.from_label(0.8, "ZXYZ")
    norm0 = s.l2_norm_sq()
    for _ in range(6):
        q = int(rng.integers(4))
        s = conjugate_rotation(s, PauliString.single(4, q, "XYZ"[int(rng.integers(3))]),
                               float(rng.normal(0, 0.3)))
    assert s.l2_norm_sq() == pytest.approx(norm0, abs=1e-12)


def test_sine_count_bounded_by_rotation_count():
    s = PauliSum.from_label(1.0, "ZZZ")
    rng = np.random.default_rng(7)
    rotations = 12
    for _ in range(rotations):
        q = int(rng.integers(3))
        s = conjugate_rotation(s, PauliString.single(3, q, "XYZ"[int(rng.integers(3))]),
                               float(rng.normal(0, 0.3)))
    assert all(t.sine_count <= rotations for t in s)


def test_anticommuting_split_adds_one_term():
    s = PauliSum.from_label(1.0, "Z")
    out = conjugate_rotation(s, PauliString.from_label("X"), 0.3)
    assert len(out) == 2  # P and iGP are distinct strings


def test_merge_keeps_min_sine_count():
    s = PauliSum(1)
    s.add(PauliTerm(0.5, PauliString.from_label("Z"), 3))
    s.add(PauliTerm(0.25, PauliString.from_label("Z"), 1))
    term = next(iter(s))
    assert term.coefficient == pytest.approx(0.75)
    assert term.sine_count == 1


def test_json_round_trip():
    s = PauliSum(3)
    s.add(PauliTerm(0.5, PauliString.from_label("XZY"), 2))
    s.add(PauliTerm(-1.25, PauliString.from_label("IIZ")))
    back = PauliSum.from_json_obj(s.to_json_obj())
    assert {t.string: (t.coefficient, t.sine_count) for t in back} == \
        {t.string: (t.coefficient, t.sine_count) for t in s}


@given(st.integers(0, 2**5 - 1), st.integers(0, 2**5 - 1),
       st.integers(0, 2**5 - 1), st.integers(0, 2**5 - 1))
@settings(max_examples=60, deadline=None)
def test_commutes_symmetric(x1, z1, x2, z2):
    p, q = PauliString(5, x1, z1), PauliString(5, x2, z2)
    assert commutes(p, q) == commutes(q, p)


@given(st.integers(0, 2**4 - 1), st.integers(0, 2**4 - 1))
@settings(max_examples=60, deadline=None)
def test_self_product_is_identity(x, z):
    p = PauliString(4, x, z)
    phase, r = multiply(p, p)
    assert phase == 1 and r.is_identity()
