"""
observables.py - Half-chain entanglement entropy and global purity

Entropies are in bits. The half-chain is sites 1..N/4 (the first half of the
N/2 qubits), and the entropy density s_half = S / (N/4) lies in [0, 1].
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigvalsh
from scipy.stats import entropy as shannon_entropy

from .errors import (
    NumericalDegeneracyError,
    PreconditionError,
    UnsupportedPartitionError,
)
from .states import Basis

NEGATIVITY_TOL = 1e-10


@dataclass(frozen=True)
class EntropyValue:
    """
    Half-chain entropy

    Attributes:
        s_half (float): Entropy density in [0, 1]
        raw_bits (float): Entropy in bits
    """

    s_half: float
    raw_bits: float


def _contiguous_range(keep, n_qubits):
    sites = sorted(int(s) for s in keep)
    if not sites:
        raise UnsupportedPartitionError("cannot keep an empty set of sites")
    if sites[0] < 1 or sites[-1] > n_qubits:
        raise UnsupportedPartitionError(f"sites {sites} outside 1..{n_qubits}")
    if sites != list(range(sites[0], sites[-1] + 1)):
        raise UnsupportedPartitionError(f"sites {sites} are not a contiguous range")
    return sites[0], len(sites)


def partial_trace(state, keep):
    """
    Reduced density matrix on a contiguous range of sites

    Args:
        state (QuantumState): State in the computational basis
        keep: Iterable of 1-based site indices forming one contiguous block

    Returns:
        np.ndarray: Reduced density matrix of dimension 2**len(keep)
    """
    if state.basis is not Basis.COMPUTATIONAL:
        raise PreconditionError("partial trace needs a computational-basis state")
    first, width = _contiguous_range(keep, state.n_qubits)
    left = 1 << (first - 1)
    mid = 1 << width
    right = 1 << (state.n_qubits - first - width + 1)

    if state.is_pure:
        psi = state.data.reshape(left, mid, right)
        return np.einsum("akb,amb->km", psi, psi.conj())
    rho = state.data.reshape(left, mid, right, left, mid, right)
    return np.einsum("akbamb->km", rho)


def von_neumann_bits(rho):
    """
    Von Neumann entropy in bits of a density matrix

    Eigenvalues down to -1e-10 are treated as zero; anything more negative
    means the input was not a density matrix.
    """
    eigenvalues = eigvalsh(rho)
    if eigenvalues[0] < -NEGATIVITY_TOL:
        raise NumericalDegeneracyError(
            f"reduced state has eigenvalue {eigenvalues[0]:.3e} below tolerance"
        )
    eigenvalues = np.clip(eigenvalues, 0.0, 1.0)
    return float(shannon_entropy(eigenvalues, base=2))


def entanglement_entropy(state, cut=None):
    """
    Entanglement entropy of the first `cut` sites

    Args:
        state (QuantumState): Pure state in the computational basis
        cut (int): Number of sites on the kept side; defaults to half the
            chain (N/4 sites for N Majoranas)

    Returns:
        EntropyValue: Entropy density and raw bits
    """
    if not state.is_pure:
        raise PreconditionError("entanglement entropy needs a pure global state")
    if cut is None:
        if state.n_qubits % 2:
            raise PreconditionError(
                f"half-chain cut needs an even number of qubits, got {state.n_qubits}"
            )
        cut = state.n_qubits // 2
    if not 1 <= cut < state.n_qubits:
        raise UnsupportedPartitionError(f"cut {cut} outside 1..{state.n_qubits - 1}")

    raw_bits = von_neumann_bits(partial_trace(state, range(1, cut + 1)))
    return EntropyValue(s_half=raw_bits / cut, raw_bits=raw_bits)


def purity(state):
    """
    Tr(rho^2) of any valid state (basis independent)

    Returns:
        float: 1 for pure states, the squared Frobenius norm of rho otherwise
    """
    if state.is_pure:
        value = np.vdot(state.data, state.data).real ** 2
        if value < 1 - 1e-9:
            raise PreconditionError(f"pure state is not normalized (purity {value!r})")
        return 1.0
    return float(np.vdot(state.data, state.data).real)
