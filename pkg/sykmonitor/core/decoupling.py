"""
decoupling.py - Reference/environment decoupling after scrambling and measurement

A system S of n qubits starts with gamma*n qubits Bell-paired to a reference
R and the rest in |1>. A Haar-random unitary scrambles S, then p*n system
qubits are measured. By deferred measurement the environment E holds a copy
of each measured bit, which makes rho_RE block diagonal in E:

    rho_RE = sum_r p_r rho_R^(r) (x) |r><r|

so ||rho_RE - rho_R (x) rho_E||_1 = sum_r p_r ||rho_R^(r) - rho_R||_1.
States on R (x) S are stored as 2**n_R x 2**n_S amplitude matrices with R
as the leading tensor factor.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import linregress, unitary_group

from .errors import FeasibilityError, InternalConsistencyError, PreconditionError
from .seeding import derive_seed, make_generator
from .states import QuantumState

logger = logging.getLogger(__name__)

MAX_TOTAL_QUBITS = 14
MAX_RECORD_BITS = 16
MIN_HAAR_SAMPLES = 50
WEIGHT_TOL = 1e-9


def _round_count(fraction, n):
    return int(math.floor(fraction * n + 0.5))


@dataclass(frozen=True)
class DecouplingSetup:
    """
    Parameters of one decoupling experiment

    Attributes:
        n_system (int): Qubits in S
        gamma (float): Fraction of S Bell-paired with R
        p_meas (float): Fraction of S measured
        n_haar_samples (int): Haar samples to average over
    """

    n_system: int
    gamma: float
    p_meas: float
    n_haar_samples: int = MIN_HAAR_SAMPLES

    def __post_init__(self):
        if self.n_system < 1:
            raise PreconditionError(f"n_system must be positive, got {self.n_system}")
        if not 0 <= self.gamma <= 1 or not 0 <= self.p_meas <= 1:
            raise PreconditionError(
                f"gamma and p_meas must lie in [0, 1], got {self.gamma}, {self.p_meas}"
            )
        if self.n_haar_samples < 1:
            raise PreconditionError("n_haar_samples must be positive")
        if self.n_reference + self.n_system > MAX_TOTAL_QUBITS:
            raise FeasibilityError(
                f"{self.n_reference} reference + {self.n_system} system qubits "
                f"exceeds the budget of {MAX_TOTAL_QUBITS}"
            )

    @property
    def n_reference(self):
        return _round_count(self.gamma, self.n_system)

    @property
    def n_measured(self):
        return _round_count(self.p_meas, self.n_system)


@dataclass(frozen=True)
class ScanRow:
    n_system: int
    gamma: float
    p_meas: float
    mean_eps: float
    stderr_eps: float
    slope: float = float("nan")
    slope_defined: bool = False


def prepare_purification(setup):
    """
    Bell pairs (R_i, S_i) for the first gamma*n system qubits, |1> elsewhere

    Returns:
        QuantumState: Pure state on R (x) S, R first
    """
    n_r, n_s = setup.n_reference, setup.n_system
    amplitudes = np.zeros((1 << n_r, 1 << n_s), dtype=complex)
    for r in range(1 << n_r):
        # S_i carries the same bit as R_i; the unpaired S qubits stay up (bit 0)
        amplitudes[r, r << (n_s - n_r)] = 1.0
    amplitudes /= np.sqrt(1 << n_r)
    return QuantumState.from_vector(amplitudes.reshape(-1))


def _amplitude_matrix(state, n_reference):
    if not state.is_pure:
        raise PreconditionError("decoupling works on pure states of R (x) S")
    if not 0 <= n_reference < state.n_qubits:
        raise PreconditionError(f"invalid reference size {n_reference}")
    return state.data.reshape(1 << n_reference, -1)


def haar_unitary(dim, rng_stream):
    """
    Haar-random unitary (QR of a complex Ginibre matrix with the R-diagonal
    phases fixed, as done by scipy.stats.unitary_group)
    """
    if dim < 2:
        raise PreconditionError(f"unitary dimension must be at least 2, got {dim}")
    return unitary_group.rvs(dim, random_state=rng_stream)


def apply_system_unitary(state, unitary, n_reference):
    """Apply U_S to the system factor; the reference is a bystander"""
    amplitudes = _amplitude_matrix(state, n_reference)
    return QuantumState.from_vector((amplitudes @ unitary.T).reshape(-1))


def _outcome_blocks(amplitudes, measured_sites, n_system):
    """Regroup amplitudes as (outcome of measured sites, R, remaining S)"""
    n_r_dim = amplitudes.shape[0]
    axes = list(measured_sites)
    rest = [site for site in range(1, n_system + 1) if site not in axes]
    tensor = amplitudes.reshape((n_r_dim,) + (2,) * n_system)
    order = axes + [0] + rest
    return tensor.transpose(order).reshape(1 << len(axes), n_r_dim, -1)


def _trace_norms(matrices):
    return np.abs(np.linalg.eigvalsh(matrices)).sum(axis=-1)


def decoupling_error(state, measured_sites, n_reference):
    """
    ||rho_RE - rho_R (x) rho_E||_1 for computational-basis measurements

    Args:
        state (QuantumState): Pure state on R (x) S after scrambling
        measured_sites: 1-based system sites recorded by the environment
        n_reference (int): Qubits in R

    Returns:
        float: Decoupling error in [0, 2]
    """
    amplitudes = _amplitude_matrix(state, n_reference)
    n_system = state.n_qubits - n_reference
    measured = sorted(int(s) for s in measured_sites)
    if len(set(measured)) != len(measured) or any(not 1 <= s <= n_system for s in measured):
        raise PreconditionError(f"invalid measured sites {measured} for {n_system} system qubits")
    if n_reference == 0 or not measured:
        return 0.0

    blocks = _outcome_blocks(amplitudes, measured, n_system)
    weighted = np.einsum("mri,msi->mrs", blocks, blocks.conj())
    weights = np.trace(weighted, axis1=1, axis2=2).real
    if abs(weights.sum() - 1) > WEIGHT_TOL:
        raise InternalConsistencyError(f"outcome weights sum to {weights.sum()!r}")
    rho_r = weighted.sum(axis=0)
    return float(_trace_norms(weighted - weights[:, None, None] * rho_r).sum())


def _random_sites(rng, n_system, count):
    return sorted(int(s) + 1 for s in rng.choice(n_system, size=count, replace=False))


def sample_errors(setup, rng_stream):
    """Decoupling error for each of the setup's Haar samples"""
    initial = prepare_purification(setup)
    errors = np.empty(setup.n_haar_samples)
    for k in range(setup.n_haar_samples):
        unitary = haar_unitary(1 << setup.n_system, rng_stream)
        scrambled = apply_system_unitary(initial, unitary, setup.n_reference)
        sites = _random_sites(rng_stream, setup.n_system, setup.n_measured)
        errors[k] = decoupling_error(scrambled, sites, setup.n_reference)
    return errors


def scan_cell(setup, seed):
    """
    Mean decoupling error of one (n, gamma, p) cell

    Returns:
        tuple: (mean, standard error) over the Haar samples
    """
    errors = sample_errors(setup, make_generator(seed))
    stderr = errors.std(ddof=1) / np.sqrt(len(errors)) if len(errors) > 1 else 0.0
    return float(errors.mean()), float(stderr)


def fit_decay_slopes(rows):
    """
    Attach the log2(mean eps) vs n_system slope to every row

    Rows are grouped by (gamma, p_meas); groups with fewer than three sizes
    or a zero mean error get an undefined slope.
    """
    groups = {}
    for row in rows:
        groups.setdefault((row.gamma, row.p_meas), []).append(row)

    fitted = []
    for (gamma, p_meas), members in groups.items():
        sizes = np.array([row.n_system for row in members], dtype=float)
        means = np.array([row.mean_eps for row in members])
        slope, defined = float("nan"), False
        if len(set(sizes)) < 3:
            logger.warning("gamma=%s p=%s: fewer than 3 sizes, slope undefined", gamma, p_meas)
        elif np.any(means <= 0):
            logger.warning("gamma=%s p=%s: zero mean error, slope undefined", gamma, p_meas)
        else:
            slope, defined = float(linregress(sizes, np.log2(means)).slope), True
        fitted.extend(
            ScanRow(r.n_system, r.gamma, r.p_meas, r.mean_eps, r.stderr_eps, slope, defined)
            for r in members
        )
    position = {(r.n_system, r.gamma, r.p_meas): k for k, r in enumerate(rows)}
    return sorted(fitted, key=lambda r: position[(r.n_system, r.gamma, r.p_meas)])


def scaling_scan(n_systems, gammas, p_meas_values, n_haar_samples=MIN_HAAR_SAMPLES, seed=0):
    """
    Mean decoupling error over a grid plus the decay slope per (gamma, p)

    Args:
        n_systems (list): System sizes
        gammas (list): Bell-pair fractions
        p_meas_values (list): Measured fractions
        n_haar_samples (int): At least 50 samples per cell
        seed (int): Master seed; each cell gets a derived seed

    Returns:
        list: ScanRows ordered by (gamma, p_meas, n_system)
    """
    if n_haar_samples < MIN_HAAR_SAMPLES:
        raise PreconditionError(f"need at least {MIN_HAAR_SAMPLES} Haar samples per cell")
    rows = []
    for gamma in gammas:
        for p_meas in p_meas_values:
            for n in n_systems:
                setup = DecouplingSetup(n, gamma, p_meas, n_haar_samples)
                mean, stderr = scan_cell(setup, derive_seed(seed, "decoupling", n, gamma, p_meas))
                logger.info("n=%d gamma=%s p=%s: eps=%.4g +- %.2g", n, gamma, p_meas, mean, stderr)
                rows.append(ScanRow(n, gamma, p_meas, mean, stderr))
    return fit_decay_slopes(rows)


def multi_round_error(setup, k_rounds, rng_stream):
    """
    ||rho_RE^(K) - rho_R (x) rho_E1 (x) ... (x) rho_EK||_1 after K rounds

    Each round applies a fresh Haar unitary to S and measures a fresh random
    set of n_measured sites. Every measurement record is followed as its own
    (unnormalized) branch, so the result is exact.

    Args:
        setup (DecouplingSetup): n_system, gamma and p_meas
        k_rounds (int): Number of rounds K >= 1
        rng_stream: numpy Generator

    Returns:
        float: The K-round decoupling error
    """
    if k_rounds < 1:
        raise PreconditionError(f"need at least one round, got {k_rounds}")
    m = setup.n_measured
    if m * k_rounds > MAX_RECORD_BITS:
        raise FeasibilityError(f"{m * k_rounds} recorded bits exceeds {MAX_RECORD_BITS}")

    n_s = setup.n_system
    index = np.arange(1 << n_s)
    # one unnormalized R x S amplitude matrix per measurement record so far
    branches = _amplitude_matrix(prepare_purification(setup), setup.n_reference)[None]
    for _ in range(k_rounds):
        branches = branches @ haar_unitary(1 << n_s, rng_stream).T
        sites = _random_sites(rng_stream, n_s, m)
        bits = [((index >> (n_s - site)) & 1) for site in sites]
        # masks[o] selects system basis states whose measured bits spell o
        masks = np.array([
            np.all([bits[j] == ((o >> (m - 1 - j)) & 1) for j in range(m)], axis=0)
            for o in range(1 << m)
        ]) if m else np.ones((1, 1 << n_s), dtype=bool)
        branches = (branches[:, None] * masks[None, :, None, :]).reshape(
            -1, branches.shape[1], branches.shape[2]
        )

    weighted = np.einsum("bri,bsi->brs", branches, branches.conj())
    weights = np.trace(weighted, axis1=1, axis2=2).real
    if abs(weights.sum() - 1) > WEIGHT_TOL:
        raise InternalConsistencyError(f"record weights sum to {weights.sum()!r}")

    # rho_E1 (x) ... (x) rho_EK from the marginal record distribution of each round
    joint = weights.reshape((1 << m,) * k_rounds)
    product = np.ones(())
    for axis in range(k_rounds):
        other = tuple(a for a in range(k_rounds) if a != axis)
        product = np.multiply.outer(product, joint.sum(axis=other))
    rho_r = weighted.sum(axis=0)
    return float(_trace_norms(weighted - product.reshape(-1)[:, None, None] * rho_r).sum())
