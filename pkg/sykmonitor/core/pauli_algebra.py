"""
pauli_algebra.py - Pauli strings in symplectic form and the Jordan-Wigner map

A Pauli string on n qubits is stored as two integer bitsets (x_mask, z_mask)
plus one complex coefficient. Site 1 is the most significant bit of each
mask and the leftmost Kronecker factor of the dense matrix, so a basis index
b has site k's bit at position (n - k).

Per site (x, z): (0, 0) = I, (1, 0) = X, (0, 1) = Z, (1, 1) = Y.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionError, FeasibilityError, PreconditionError

MAX_DENSE_QUBITS = 12
MAX_MAJORANAS = 2 * MAX_DENSE_QUBITS

_LETTERS = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_BITS = {letter: bits for bits, letter in _LETTERS.items()}

# single-site products: (left, right) -> phase of left*right
_SITE_PHASE = {
    ("X", "Y"): 1j, ("Y", "Z"): 1j, ("Z", "X"): 1j,
    ("Y", "X"): -1j, ("Z", "Y"): -1j, ("X", "Z"): -1j,
}
_I_POWERS = (1, 1j, -1, -1j)


@dataclass(frozen=True)
class PauliString:
    """
    A phased tensor product of single-site Pauli operators

    Attributes:
        n_qubits (int): Number of sites
        x_mask (int): X component per site (site 1 = most significant bit)
        z_mask (int): Z component per site
        coeff (complex): Scalar prefactor
    """

    n_qubits: int
    x_mask: int
    z_mask: int
    coeff: complex = 1.0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise PreconditionError(f"n_qubits must be positive, got {self.n_qubits}")
        limit = 1 << self.n_qubits
        if not (0 <= self.x_mask < limit and 0 <= self.z_mask < limit):
            raise DimensionError(
                f"masks {self.x_mask:#x}/{self.z_mask:#x} do not fit {self.n_qubits} qubits"
            )
        object.__setattr__(self, "coeff", complex(self.coeff))

    @classmethod
    def identity(cls, n_qubits, coeff=1.0):
        return cls(n_qubits, 0, 0, coeff)

    @classmethod
    def from_label(cls, label, coeff=1.0):
        """
        Build a string from a label such as "XIZY" (site 1 first)

        Args:
            label (str): One of I, X, Y, Z per site
            coeff (complex): Prefactor

        Returns:
            PauliString: The parsed string
        """
        x_mask = z_mask = 0
        for letter in label.upper():
            if letter not in _BITS:
                raise PreconditionError(f"unknown Pauli letter {letter!r} in {label!r}")
            x_bit, z_bit = _BITS[letter]
            x_mask = (x_mask << 1) | x_bit
            z_mask = (z_mask << 1) | z_bit
        return cls(len(label), x_mask, z_mask, coeff)

    def site_letter(self, site):
        """Pauli letter acting on a 1-based site"""
        shift = self.n_qubits - site
        return _LETTERS[((self.x_mask >> shift) & 1, (self.z_mask >> shift) & 1)]

    @property
    def label(self):
        return "".join(self.site_letter(k) for k in range(1, self.n_qubits + 1))

    @property
    def weight(self):
        """Number of non-identity sites"""
        return bin(self.x_mask | self.z_mask).count("1")

    def same_operator(self, other):
        """True when both strings are scalar multiples of one operator"""
        return (self.n_qubits, self.x_mask, self.z_mask) == (
            other.n_qubits, other.x_mask, other.z_mask
        )

    def __mul__(self, other):
        if isinstance(other, PauliString):
            return multiply(self, other)
        return PauliString(self.n_qubits, self.x_mask, self.z_mask, self.coeff * other)

    def __rmul__(self, scalar):
        return PauliString(self.n_qubits, self.x_mask, self.z_mask, self.coeff * scalar)

    def __repr__(self):
        return f"PauliString({self.coeff:.6g} * {self.label})"


def jw_majorana(index, n_majoranas):
    """
    Jordan-Wigner image of Majorana operator chi_index

    chi_{2i-1} = X_1 ... X_{i-1} Z_i / sqrt(2) and
    chi_{2i}   = X_1 ... X_{i-1} Y_i / sqrt(2).

    Args:
        index (int): Majorana index, 1..n_majoranas
        n_majoranas (int): Even number of Majoranas N (N/2 qubits)

    Returns:
        PauliString: String on N/2 qubits with coeff 1/sqrt(2)
    """
    if n_majoranas % 2 or not 2 <= n_majoranas <= MAX_MAJORANAS:
        raise PreconditionError(
            f"n_majoranas must be even and in [2, {MAX_MAJORANAS}], got {n_majoranas}"
        )
    if not 1 <= index <= n_majoranas:
        raise PreconditionError(f"Majorana index {index} outside 1..{n_majoranas}")

    n_qubits = n_majoranas // 2
    site = (index + 1) // 2
    shift = n_qubits - site
    # X on every site left of `site`
    x_prefix = ((1 << (site - 1)) - 1) << (shift + 1)
    if index % 2:
        x_mask, z_mask = x_prefix, 1 << shift
    else:
        x_mask, z_mask = x_prefix | (1 << shift), 1 << shift
    return PauliString(n_qubits, x_mask, z_mask, 1 / np.sqrt(2))


@lru_cache(maxsize=None)
def majorana_strings(n_majoranas):
    """All N Majorana strings, chi_1 first"""
    return tuple(jw_majorana(i, n_majoranas) for i in range(1, n_majoranas + 1))


def multiply(a, b):
    """
    Operator product a*b

    Masks combine by XOR; the phase is accumulated site by site, site 1 first,
    from the single-site Pauli table.

    Args:
        a (PauliString): Left factor
        b (PauliString): Right factor

    Returns:
        PauliString: The product string
    """
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"cannot multiply {a.n_qubits}- and {b.n_qubits}-qubit strings")

    phase = 1 + 0j
    for site in range(1, a.n_qubits + 1):
        pair = (a.site_letter(site), b.site_letter(site))
        phase *= _SITE_PHASE.get(pair, 1)
    return PauliString(
        a.n_qubits, a.x_mask ^ b.x_mask, a.z_mask ^ b.z_mask, a.coeff * b.coeff * phase
    )


def bit_parity(values):
    """Parity (0/1) of the set bits of each non-negative integer in an array"""
    v = np.asarray(values, dtype=np.int64).copy()
    for shift in (32, 16, 8, 4, 2, 1):
        v ^= v >> shift
    return v & 1


def sparse_entries(s):
    """
    Nonzero pattern of a Pauli string's matrix

    Column b holds a single entry at row b XOR x_mask with value
    coeff * i^{#Y} * (-1)^{popcount(b AND z_mask)}.

    Returns:
        tuple: (rows, cols, values) arrays of length 2**n_qubits
    """
    if s.n_qubits > MAX_DENSE_QUBITS:
        raise FeasibilityError(
            f"{s.n_qubits} qubits exceeds the dense limit of {MAX_DENSE_QUBITS}"
        )
    cols = np.arange(1 << s.n_qubits, dtype=np.int64)
    rows = cols ^ s.x_mask
    n_y = bin(s.x_mask & s.z_mask).count("1")
    signs = 1 - 2 * bit_parity(cols & s.z_mask)
    values = s.coeff * _I_POWERS[n_y % 4] * signs
    return rows, cols, values.astype(complex)


def to_matrix(s):
    """
    Dense matrix of a Pauli string

    Args:
        s (PauliString): String on at most 12 qubits

    Returns:
        np.ndarray: Complex matrix of dimension 2**n_qubits
    """
    rows, cols, values = sparse_entries(s)
    dim = 1 << s.n_qubits
    matrix = np.zeros((dim, dim), dtype=complex)
    matrix[rows, cols] = values
    return matrix
