"""
syk_model.py - Random SYK couplings, the dense Hamiltonian and its propagator

H = sum_{i<j<k<l} -J_ijkl chi_i chi_j chi_k chi_l with Gaussian couplings of
zero mean and variance 6 J^2 / N^3. Each four-Majorana product is reduced to a
single Pauli string before anything dense is touched, and the Hamiltonian is
diagonalized once so that any propagation time costs one phase vector.
"""

import json
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

import numpy as np
from scipy.linalg import eigh

from .errors import InternalConsistencyError, PreconditionError
from .pauli_algebra import _I_POWERS, bit_parity, majorana_strings, multiply
from .seeding import make_generator

logger = logging.getLogger(__name__)

MIN_MAJORANAS = 8
MAX_MAJORANAS = 24
HERMITICITY_TOL = 1e-10


def coupling_variance(n_majoranas, j_strength):
    """Population variance 6 J^2 / N^3 of each coupling"""
    return 6.0 * j_strength ** 2 / n_majoranas ** 3


@lru_cache(maxsize=None)
def quadruples(n_majoranas):
    """Strictly ordered index quadruples (1-based), in lexicographic order"""
    return tuple(combinations(range(1, n_majoranas + 1), 4))


@dataclass(frozen=True, eq=False)
class CouplingTensor:
    """
    One realization of the couplings J_ijkl

    Attributes:
        n_majoranas (int): N
        j_strength (float): J
        values (np.ndarray): One coupling per quadruple, ordered as quadruples(N)
        seed (int): Seed the realization was drawn from, if known
    """

    n_majoranas: int
    j_strength: float
    values: np.ndarray
    seed: int = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        expected = len(quadruples(self.n_majoranas))
        if values.shape != (expected,):
            raise PreconditionError(
                f"expected {expected} couplings for N={self.n_majoranas}, got {values.shape}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, quad):
        return float(self.values[_quad_index(self.n_majoranas)[tuple(quad)]])

    def as_mapping(self):
        """Dict {(i, j, k, l): value}"""
        return dict(zip(quadruples(self.n_majoranas), self.values.tolist()))

    def to_dict(self):
        """Convert the realization to a dictionary for JSON storage"""
        return {
            "n_majoranas": self.n_majoranas,
            "j_strength": self.j_strength,
            "seed": self.seed,
            "couplings": [
                {"i": i, "j": j, "k": k, "l": l, "value": value}
                for (i, j, k, l), value in self.as_mapping().items()
            ],
        }

    @classmethod
    def from_dict(cls, data):
        """Create a CouplingTensor from a dictionary produced by to_dict"""
        n = int(data["n_majoranas"])
        index = _quad_index(n)
        values = np.zeros(len(index))
        for entry in data.get("couplings", []):
            quad = (entry["i"], entry["j"], entry["k"], entry["l"])
            if quad not in index:
                raise PreconditionError(f"invalid coupling quadruple {quad} for N={n}")
            values[index[quad]] = float(entry["value"])
        return cls(n, float(data["j_strength"]), values, data.get("seed"))


@lru_cache(maxsize=None)
def _quad_index(n_majoranas):
    return {quad: pos for pos, quad in enumerate(quadruples(n_majoranas))}


def save_couplings(couplings, path):
    """Write a realization to a JSON file for replay"""
    with open(path, "w") as f:
        json.dump(couplings.to_dict(), f, indent=4)


def load_couplings(path):
    """Read a realization written by save_couplings"""
    with open(path, "r") as f:
        return CouplingTensor.from_dict(json.load(f))


def sample_couplings(n_majoranas, j_strength, rng_stream):
    """
    Draw one coupling realization

    Args:
        n_majoranas (int): Even N with 8 <= N <= 24
        j_strength (float): J >= 0 (J = 0 gives all-zero couplings)
        rng_stream: numpy Generator, or an integer seed

    Returns:
        CouplingTensor: C(N, 4) i.i.d. Gaussian couplings
    """
    if n_majoranas % 2 or not MIN_MAJORANAS <= n_majoranas <= MAX_MAJORANAS:
        raise PreconditionError(
            f"N must be even and in [{MIN_MAJORANAS}, {MAX_MAJORANAS}], got {n_majoranas}"
        )
    if j_strength < 0:
        raise PreconditionError(f"J must be non-negative, got {j_strength}")

    seed = None
    if isinstance(rng_stream, (int, np.integer)):
        seed = int(rng_stream)
        rng_stream = make_generator(seed)

    scale = np.sqrt(coupling_variance(n_majoranas, j_strength))
    values = rng_stream.normal(0.0, 1.0, size=len(quadruples(n_majoranas))) * scale
    return CouplingTensor(n_majoranas, float(j_strength), values, seed)


@lru_cache(maxsize=None)
def _quartic_terms(n_majoranas):
    """
    Unit-coupling Pauli reduction of every chi_i chi_j chi_k chi_l

    Returns:
        tuple: (x_masks, z_masks, prefactors) with prefactor = coeff * i^{#Y}
    """
    chis = majorana_strings(n_majoranas)
    x_masks, z_masks, prefactors = [], [], []
    for i, j, k, l in quadruples(n_majoranas):
        term = multiply(multiply(multiply(chis[i - 1], chis[j - 1]), chis[k - 1]), chis[l - 1])
        n_y = bin(term.x_mask & term.z_mask).count("1")
        x_masks.append(term.x_mask)
        z_masks.append(term.z_mask)
        prefactors.append(term.coeff * _I_POWERS[n_y % 4])
    return np.array(x_masks), np.array(z_masks), np.array(prefactors)


@dataclass(frozen=True, eq=False)
class SpectralHamiltonian:
    """
    Dense Hermitian Hamiltonian with its cached eigendecomposition

    Attributes:
        matrix (np.ndarray): H, dimension 2**(N/2)
        eigenvalues (np.ndarray): Ascending energies
        eigenvectors (np.ndarray): Unitary V, columns are eigenstates
        couplings (CouplingTensor): The realization H was built from
    """

    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    couplings: CouplingTensor = field(default=None, repr=False)

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def n_qubits(self):
        return self.dim.bit_length() - 1

    def phases(self, t):
        """exp(-i E_k t) for every level"""
        return np.exp(-1j * self.eigenvalues * t)

    def propagator(self, t):
        return propagator(self, t)


def _assemble(couplings):
    n = couplings.n_majoranas
    dim = 1 << (n // 2)
    x_masks, z_masks, prefactors = _quartic_terms(n)
    weights = -couplings.values * prefactors
    cols = np.arange(dim, dtype=np.int64)
    matrix = np.zeros((dim, dim), dtype=complex)

    # strings sharing an X pattern fill the same permutation of entries
    for x_mask in np.unique(x_masks):
        members = np.flatnonzero(x_masks == x_mask)
        signs = 1 - 2 * bit_parity(cols[None, :] & z_masks[members, None])
        matrix[cols ^ x_mask, cols] += weights[members] @ signs
    return matrix


def build_hamiltonian(couplings):
    """
    Assemble and diagonalize H for one realization

    Args:
        couplings (CouplingTensor): The realization

    Returns:
        SpectralHamiltonian: H with eigenvalues and eigenvectors cached
    """
    matrix = _assemble(couplings)

    asymmetry = np.max(np.abs(matrix - matrix.conj().T)) if matrix.size else 0.0
    if asymmetry > HERMITICITY_TOL:
        raise InternalConsistencyError(
            f"assembled Hamiltonian is not Hermitian (max |H - H^dag| = {asymmetry:.3e})"
        )
    # symmetrize away rounding before eigh
    matrix = 0.5 * (matrix + matrix.conj().T)

    eigenvalues, eigenvectors = eigh(matrix)
    logger.debug(
        "built N=%d Hamiltonian: dim=%d, spectrum [%.4f, %.4f]",
        couplings.n_majoranas, matrix.shape[0], eigenvalues[0], eigenvalues[-1],
    )
    return SpectralHamiltonian(matrix, eigenvalues, eigenvectors, couplings)


def propagator(h, t):
    """
    Exact propagator U(t) = V diag(exp(-i E t)) V^dag

    Args:
        h (SpectralHamiltonian): Diagonalized Hamiltonian
        t (float): Time (hbar = 1)

    Returns:
        np.ndarray: Dense unitary matrix
    """
    v = h.eigenvectors
    return (v * h.phases(t)) @ v.conj().T
