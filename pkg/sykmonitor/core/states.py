"""
states.py - Pure and mixed quantum states on N/2 qubits

Basis convention: site 1 is the most significant bit of a basis index and,
on every site, index 0 is the sigma^z = +1 ("up") state. The all-up product
state is therefore basis vector 0.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DimensionError, PreconditionError

STATE_TOL = 1e-10


class StateKind(str, Enum):
    PURE = "pure"
    MIXED = "mixed"


class Basis(str, Enum):
    COMPUTATIONAL = "computational"
    ENERGY = "energy"


@dataclass(frozen=True, eq=False)
class QuantumState:
    """
    A pure amplitude vector or a density matrix, tagged with its basis

    Attributes:
        kind (StateKind): pure or mixed
        data (np.ndarray): Vector of length d or d x d matrix
        basis (Basis): computational or energy eigenbasis
        n_qubits (int): log2(d)
    """

    kind: StateKind
    data: np.ndarray
    basis: Basis = Basis.COMPUTATIONAL
    n_qubits: int = None

    def __post_init__(self):
        kind = StateKind(self.kind)
        data = np.asarray(self.data, dtype=complex)
        expected_ndim = 1 if kind is StateKind.PURE else 2
        if data.ndim != expected_ndim:
            raise DimensionError(f"{kind.value} state needs a {expected_ndim}-d array")
        dim = data.shape[0]
        if dim < 1 or dim & (dim - 1) or (data.ndim == 2 and data.shape[1] != dim):
            raise DimensionError(f"state shape {data.shape} is not a power-of-two square")
        n_qubits = dim.bit_length() - 1
        if self.n_qubits is not None and self.n_qubits != n_qubits:
            raise DimensionError(f"data has {n_qubits} qubits, tagged {self.n_qubits}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "basis", Basis(self.basis))
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "n_qubits", n_qubits)

    @property
    def dim(self):
        return self.data.shape[0]

    @property
    def is_pure(self):
        return self.kind is StateKind.PURE

    @classmethod
    def all_up(cls, n_qubits):
        """|11...1>, every spin in the sigma^z = +1 state"""
        psi = np.zeros(1 << n_qubits, dtype=complex)
        psi[0] = 1.0
        return cls(StateKind.PURE, psi, Basis.COMPUTATIONAL)

    @classmethod
    def maximally_mixed(cls, n_qubits):
        """The infinite-temperature state I / 2**n_qubits (basis independent)"""
        dim = 1 << n_qubits
        return cls(StateKind.MIXED, np.eye(dim, dtype=complex) / dim, Basis.COMPUTATIONAL)

    @classmethod
    def from_vector(cls, psi, basis=Basis.COMPUTATIONAL):
        return cls(StateKind.PURE, psi, basis)

    @classmethod
    def from_density(cls, rho, basis=Basis.COMPUTATIONAL):
        return cls(StateKind.MIXED, rho, basis)

    def as_density(self):
        """Density matrix of this state (copy for pure states)"""
        if self.is_pure:
            return np.outer(self.data, self.data.conj())
        return self.data

    def to_basis(self, basis, hamiltonian):
        """
        Express the state in another basis

        Args:
            basis (Basis): Target basis
            hamiltonian (SpectralHamiltonian): Supplies the eigenvectors V

        Returns:
            QuantumState: Same state, new coordinates
        """
        basis = Basis(basis)
        if basis is self.basis:
            return self
        if hamiltonian.dim != self.dim:
            raise DimensionError(f"Hamiltonian dim {hamiltonian.dim} != state dim {self.dim}")
        v = hamiltonian.eigenvectors
        if basis is Basis.ENERGY:
            v = v.conj().T
        if self.is_pure:
            data = v @ self.data
        else:
            data = v @ self.data @ v.conj().T
        return QuantumState(self.kind, data, basis)

    def validate(self, tol=STATE_TOL):
        """
        Check normalization (and Hermiticity/positivity for mixed states)

        Raises:
            PreconditionError: When the state is not a valid quantum state
        """
        if self.is_pure:
            norm = np.linalg.norm(self.data)
            if abs(norm - 1) > tol:
                raise PreconditionError(f"pure state has norm {norm!r}")
            return self

        rho = self.data
        trace = np.trace(rho).real
        if abs(trace - 1) > tol:
            raise PreconditionError(f"density matrix has trace {trace!r}")
        if np.max(np.abs(rho - rho.conj().T)) > tol:
            raise PreconditionError("density matrix is not Hermitian")
        smallest = np.linalg.eigvalsh(rho)[0]
        if smallest < -tol:
            raise PreconditionError(f"density matrix has eigenvalue {smallest!r}")
        return self
