"""
test_pauli_algebra.py - Pauli strings and the Jordan-Wigner Majoranas
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sykmonitor.core.errors import DimensionError, FeasibilityError, PreconditionError
from sykmonitor.core.pauli_algebra import (
    PauliString,
    jw_majorana,
    majorana_strings,
    multiply,
    to_matrix,
)

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)

labels = st.text(alphabet="IXYZ", min_size=3, max_size=3)
coefficients = st.sampled_from([1, -1, 1j, -1j, 0.5, 2 - 1j])


def test_label_parsing():
    """Labels list site 1 first and map onto the symplectic masks"""
    s = PauliString.from_label("XIZY")
    assert s.label == "XIZY"
    assert s.x_mask == 0b1001
    assert s.z_mask == 0b0011
    assert s.weight == 3

    with pytest.raises(PreconditionError):
        PauliString.from_label("XQ")


def test_single_site_matrices():
    """Dense matrices follow the usual Pauli matrices, site 1 leftmost"""
    assert np.allclose(to_matrix(PauliString.identity(1)), I2)
    assert np.allclose(to_matrix(PauliString.from_label("Z")), np.diag([1, -1]))
    assert np.allclose(to_matrix(PauliString.from_label("Y")), Y)
    assert np.allclose(to_matrix(PauliString.from_label("XZ")), np.kron(X, Z))
    assert np.allclose(to_matrix(PauliString.from_label("IYX", 2j)), 2j * np.kron(I2, np.kron(Y, X)))


def test_majorana_examples():
    """chi_1..chi_4 on two qubits"""
    root = 1 / np.sqrt(2)

    # Test 1: chi_1 = Z_1 / sqrt(2)
    chi1 = jw_majorana(1, 4)
    assert (chi1.x_mask, chi1.z_mask) == (0b00, 0b10)
    assert chi1.coeff == pytest.approx(root)

    # Test 2: chi_2 = Y_1, chi_3 = X_1 Z_2, chi_4 = X_1 Y_2
    assert jw_majorana(2, 4).label == "YI"
    assert jw_majorana(3, 4).label == "XZ"
    assert np.allclose(to_matrix(jw_majorana(4, 4)), root * np.kron(X, Y))

    with pytest.raises(PreconditionError):
        jw_majorana(5, 4)
    with pytest.raises(PreconditionError):
        jw_majorana(1, 5)


def test_majorana_anticommutation():
    """{chi_i, chi_j} = delta_ij for all pairs at N=8"""
    mats = [to_matrix(s) for s in majorana_strings(8)]
    identity = np.eye(16)
    for i, a in enumerate(mats):
        assert np.allclose(a, a.conj().T, atol=1e-12)
        for j, b in enumerate(mats):
            expected = identity if i == j else 0 * identity
            assert np.allclose(a @ b + b @ a, expected, atol=1e-12)


def test_multiply_examples():
    """Single-site table and identity products"""
    product = multiply(PauliString.from_label("X"), PauliString.from_label("Z"))
    assert product.label == "Y"
    assert product.coeff == pytest.approx(-1j)

    s = PauliString.from_label("XYZ", 3)
    assert multiply(s, PauliString.identity(3)).coeff == s.coeff
    assert multiply(s, PauliString.identity(3)).same_operator(s)

    square = multiply(jw_majorana(1, 4), jw_majorana(1, 4))
    assert square.label == "II"
    assert square.coeff == pytest.approx(0.5)

    with pytest.raises(DimensionError):
        multiply(PauliString.identity(2), PauliString.identity(3))


@settings(max_examples=60, deadline=None)
@given(labels, labels, coefficients, coefficients)
def test_multiply_matches_matrix_product(a_label, b_label, a_coeff, b_coeff):
    """The symplectic product agrees with the dense product"""
    a = PauliString.from_label(a_label, a_coeff)
    b = PauliString.from_label(b_label, b_coeff)
    assert np.allclose(to_matrix(multiply(a, b)), to_matrix(a) @ to_matrix(b), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(labels, labels, labels)
def test_multiply_is_associative(a_label, b_label, c_label):
    a, b, c = (PauliString.from_label(label) for label in (a_label, b_label, c_label))
    left = (a * b) * c
    right = a * (b * c)
    assert left.same_operator(right)
    assert left.coeff == pytest.approx(right.coeff)


def test_dense_limit():
    """More than 12 qubits is refused for dense matrices"""
    with pytest.raises(FeasibilityError):
        to_matrix(PauliString.identity(13))
    with pytest.raises(DimensionError):
        PauliString(2, 0b100, 0)
