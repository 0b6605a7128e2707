"""
trajectory.py - Monitored evolution of one state under one SYK realization

The simulation walks a grid of steps of length dt. At each step a coin with
success probability r_m = Gamma_m * dt decides whether a measurement event
happens (unitary increment first, then the measurement). At an event every
site is measured independently with probability p_m, outcomes are drawn from
the Born rule site by site, and the state is projected and renormalized.

Between events nothing but the Hamiltonian acts, so the state is kept in the
energy eigenbasis and a whole gap is one phase multiplication. The state is
rotated to the computational basis only for projections and for entropy
records.
"""

import json
import logging
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np
from scipy.linalg import eigh

from .errors import (
    ConfigError,
    NumericalDegeneracyError,
    PreconditionError,
    StateValidityError,
)
from .observables import entanglement_entropy
from .seeding import spawn_generators
from .states import Basis, QuantumState, StateKind

logger = logging.getLogger(__name__)

MAX_RATE_STEP = 0.1
MIN_BRANCH_WEIGHT = 1e-14
PURE_THRESHOLD = 1e-12
VALIDITY_TOL = 1e-10

__all__ = [
    "InitialState", "Observable", "QuantumState", "MeasurementEvent",
    "TrajectoryConfig", "TrajectoryRecord", "schedule_step", "schedule_steps",
    "sample_measured_sites", "project", "run_trajectory",
    "save_record", "load_record",
]


class InitialState(str, Enum):
    ALL_UP = "all_up"
    MAXIMALLY_MIXED = "maximally_mixed"


class Observable(str, Enum):
    HALF_CHAIN_ENTROPY = "half_chain_entropy"
    PURITY = "purity"

    @property
    def series_key(self):
        return "s_half" if self is Observable.HALF_CHAIN_ENTROPY else "purity"


@dataclass(frozen=True)
class TrajectoryConfig:
    """
    Parameters of one monitored trajectory

    Attributes:
        t_max (float): Final time (units of 1/J)
        gamma_m (float): Measurement rate Gamma_m
        p_m (float): Per-site measurement probability at an event
        dt (float): Step of the measurement schedule
        record_interval (float): Spacing of recorded observables
        initial (InitialState): all_up (pure) or maximally_mixed
        seed (int): 64-bit seed of the trajectory's random streams
        validate_states (bool): Check state validity after every event
    """

    t_max: float
    gamma_m: float
    p_m: float
    dt: float = 0.05
    record_interval: float = 0.5
    initial: InitialState = InitialState.ALL_UP
    seed: int = 0
    validate_states: bool = True

    def __post_init__(self):
        problems = []
        if not self.dt > 0:
            problems.append(("dt", f"must be positive, got {self.dt}"))
        if not self.t_max > 0:
            problems.append(("t_max", f"must be positive, got {self.t_max}"))
        if not self.gamma_m >= 0:
            problems.append(("gamma_m", f"must be non-negative, got {self.gamma_m}"))
        if not 0 <= self.p_m <= 1:
            problems.append(("p_m", f"must lie in [0, 1], got {self.p_m}"))
        if self.dt > 0 and self.gamma_m * self.dt > MAX_RATE_STEP + 1e-8:
            problems.append(
                ("gamma_m", f"Gamma_m*dt = {self.gamma_m * self.dt:.4g} exceeds {MAX_RATE_STEP}")
            )
        if self.record_interval < self.dt - 1e-12:
            problems.append(("record_interval", f"must be >= dt, got {self.record_interval}"))
        if not 0 <= int(self.seed) < 2 ** 64:
            problems.append(("seed", f"must be an unsigned 64-bit integer, got {self.seed}"))
        try:
            object.__setattr__(self, "initial", InitialState(self.initial))
        except ValueError:
            problems.append(("initial", f"unknown initial state {self.initial!r}"))
        if problems:
            raise ConfigError(problems)

    @property
    def r_m(self):
        return self.gamma_m * self.dt

    @property
    def n_steps(self):
        return int(round(self.t_max / self.dt))

    def record_times(self):
        count = int(np.floor(self.t_max / self.record_interval + 1e-9))
        return np.arange(count + 1) * self.record_interval

    def to_dict(self):
        data = asdict(self)
        data["initial"] = self.initial.value
        return data

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


@dataclass(frozen=True)
class MeasurementEvent:
    """
    One scheduled measurement round

    Attributes:
        time (float): Event time
        sites (tuple): Measured sites (1-based, increasing); may be empty
        outcomes (tuple): One bit per site, 1 = sigma^z eigenvalue +1
        observables (dict): Observable values right after the projection
    """

    time: float
    sites: tuple
    outcomes: tuple
    observables: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.sites)) != len(self.sites):
            raise PreconditionError(f"measured sites repeat: {self.sites}")
        if len(self.outcomes) != len(self.sites):
            raise PreconditionError("one outcome per measured site is required")

    def to_dict(self):
        data = {"t": self.time, "sites": list(self.sites), "outcomes": list(self.outcomes)}
        data.update(self.observables)
        return data

    @classmethod
    def from_dict(cls, data):
        extra = {k: v for k, v in data.items() if k not in ("t", "sites", "outcomes")}
        return cls(data["t"], tuple(data["sites"]), tuple(data["outcomes"]), extra)


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    """
    Everything one trajectory produced

    Attributes:
        seed (int): Trajectory seed
        config (TrajectoryConfig): Configuration it ran with
        events (tuple): MeasurementEvents in time order (the history R)
        t (np.ndarray): Record times
        series (dict): Observable key ("s_half", "purity") -> values on t
    """

    seed: int
    config: TrajectoryConfig
    events: tuple
    t: np.ndarray
    series: dict

    def to_dict(self):
        series = {"t": self.t.tolist()}
        series.update({key: values.tolist() for key, values in self.series.items()})
        return {
            "seed": self.seed,
            "config": self.config.to_dict(),
            "events": [event.to_dict() for event in self.events],
            "series": series,
        }

    @classmethod
    def from_dict(cls, data):
        series = dict(data["series"])
        t = np.asarray(series.pop("t"), dtype=float)
        return cls(
            seed=int(data["seed"]),
            config=TrajectoryConfig.from_dict(data["config"]),
            events=tuple(MeasurementEvent.from_dict(e) for e in data["events"]),
            t=t,
            series={key: np.asarray(values, dtype=float) for key, values in series.items()},
        )


def save_record(record, path):
    """Write a trajectory record as JSON"""
    with open(path, "w") as f:
        json.dump(record.to_dict(), f, indent=2)


def load_record(path):
    with open(path, "r") as f:
        return TrajectoryRecord.from_dict(json.load(f))


def _check_probability(name, value):
    if not 0 <= value <= 1:
        raise PreconditionError(f"{name} must lie in [0, 1], got {value}")


def schedule_step(rng_stream, r_m):
    """
    Decide whether a measurement happens in one step

    Args:
        rng_stream: numpy Generator
        r_m (float): Per-step measurement probability Gamma_m * dt

    Returns:
        bool: True with probability r_m
    """
    _check_probability("r_m", r_m)
    return bool(rng_stream.random() < r_m)


def schedule_steps(rng_stream, r_m, n_steps):
    """Array form of n_steps consecutive schedule_step draws"""
    _check_probability("r_m", r_m)
    return rng_stream.random(n_steps) < r_m


def sample_measured_sites(rng_stream, n_sites, p_m):
    """
    Choose the sites measured at one event

    Each site is included independently with probability p_m, so the number
    of sites is Binomial(n_sites, p_m) and every site is equally likely.

    Returns:
        tuple: 1-based site indices in increasing order (possibly empty)
    """
    _check_probability("p_m", p_m)
    chosen = rng_stream.random(n_sites) < p_m
    return tuple(int(i) + 1 for i in np.flatnonzero(chosen))


def project(state, sites, rng_stream):
    """
    Projective sigma^z measurement of the given sites

    Outcomes are drawn one site at a time from the conditional Born rule,
    which samples the joint outcome string with probability Tr(P rho).

    Args:
        state (QuantumState): Computational-basis state
        sites: Non-empty collection of distinct 1-based sites
        rng_stream: numpy Generator

    Returns:
        tuple: (post-measurement QuantumState, outcome bits)
    """
    if state.basis is not Basis.COMPUTATIONAL:
        raise PreconditionError("projection needs a computational-basis state")
    sites = tuple(int(s) for s in sites)
    if not sites:
        raise PreconditionError("no sites to measure")
    if len(set(sites)) != len(sites) or min(sites) < 1 or max(sites) > state.n_qubits:
        raise PreconditionError(f"invalid measured sites {sites} for {state.n_qubits} qubits")

    n = state.n_qubits
    index = np.arange(state.dim)
    data = state.data.copy()
    outcomes = []
    for site in sites:
        up = ((index >> (n - site)) & 1) == 0
        if state.is_pure:
            weights = np.abs(data) ** 2
        else:
            weights = np.diagonal(data).real
        total = weights.sum()
        up_weight = weights[up].sum()

        outcome = 1 if rng_stream.random() < up_weight / total else 0
        keep = up if outcome else ~up
        branch = up_weight if outcome else total - up_weight
        if branch < MIN_BRANCH_WEIGHT:
            raise NumericalDegeneracyError(
                f"projected weight {branch:.3e} on site {site} (outcome {outcome})"
            )
        if state.is_pure:
            data = np.where(keep, data, 0) / np.sqrt(branch)
        else:
            data = data * np.outer(keep, keep) / branch
        outcomes.append(outcome)

    return QuantumState(state.kind, data, Basis.COMPUTATIONAL), tuple(outcomes)


class _EnergyFrame:
    """Mutable working copy of the state in the energy eigenbasis"""

    def __init__(self, hamiltonian, initial):
        self.h = hamiltonian
        self.v = hamiltonian.eigenvectors
        self.time = 0.0
        if initial is InitialState.ALL_UP:
            self.kind = StateKind.PURE
            # all-up is basis vector 0, so its energy coordinates are row 0 of V
            self.data = self.v[0, :].conj().copy()
        else:
            self.kind = StateKind.MIXED
            self.data = np.eye(hamiltonian.dim, dtype=complex) / hamiltonian.dim

    @property
    def is_pure(self):
        return self.kind is StateKind.PURE

    def advance(self, t):
        phases = self.h.phases(t - self.time)
        if self.is_pure:
            self.data = self.data * phases
        else:
            self.data = self.data * np.outer(phases, phases.conj())
        self.time = t

    def computational(self):
        if self.is_pure:
            return QuantumState(StateKind.PURE, self.v @ self.data)
        return QuantumState(StateKind.MIXED, self.v @ self.data @ self.v.conj().T)

    def load(self, state):
        vh = self.v.conj().T
        if state.is_pure:
            self.data = vh @ state.data
        else:
            self.data = vh @ state.data @ self.v

    def purity(self):
        if self.is_pure:
            return 1.0
        return float(np.vdot(self.data, self.data).real)

    def collapse_if_pure(self):
        """Switch a mixed state whose purity is 1 to its pure representation"""
        if self.is_pure or self.purity() < 1 - PURE_THRESHOLD:
            return False
        _, vectors = eigh(self.data)
        self.data = vectors[:, -1].copy()
        self.kind = StateKind.PURE
        return True


def _measure(frame, observables):
    values = {}
    for observable in observables:
        if observable is Observable.HALF_CHAIN_ENTROPY:
            values["s_half"] = entanglement_entropy(frame.computational()).s_half
        else:
            values["purity"] = frame.purity()
    return values


def _check_frame(frame, time, event_index):
    try:
        QuantumState(frame.kind, frame.data, Basis.ENERGY).validate(VALIDITY_TOL)
    except PreconditionError as e:
        raise StateValidityError(str(e), time, event_index) from e


def run_trajectory(h, cfg, observable_set=(Observable.HALF_CHAIN_ENTROPY,)):
    """
    Simulate one monitored trajectory

    Args:
        h (SpectralHamiltonian): Diagonalized Hamiltonian (one realization)
        cfg (TrajectoryConfig): Run parameters, including the seed
        observable_set: Observables to record ("half_chain_entropy" needs a
            pure start)

    Returns:
        TrajectoryRecord: Recorded series plus the full measurement history
    """
    observables = tuple(sorted({Observable(o) for o in observable_set}, key=lambda o: o.value))
    if not observables:
        raise PreconditionError("at least one observable must be recorded")
    if Observable.HALF_CHAIN_ENTROPY in observables and cfg.initial is not InitialState.ALL_UP:
        raise PreconditionError("half-chain entropy is only recorded for pure starts")

    # the whole event schedule is drawn up front from its own stream
    schedule_rng, outcome_rng = spawn_generators(cfg.seed, 2)
    n_qubits = h.n_qubits
    frame = _EnergyFrame(h, cfg.initial)

    event_times = (np.flatnonzero(schedule_steps(schedule_rng, cfg.r_m, cfg.n_steps)) + 1) * cfg.dt
    record_times = cfg.record_times()
    series = {o.series_key: np.empty(len(record_times)) for o in observables}
    events = []
    settled_purity = frame.purity()

    def record_until(limit):
        nonlocal next_record
        while next_record < len(record_times) and record_times[next_record] < limit:
            frame.advance(record_times[next_record])
            values = _measure(frame, observables)
            if cfg.validate_states and "purity" in values:
                if abs(values["purity"] - settled_purity) > VALIDITY_TOL:
                    raise StateValidityError(
                        "purity changed under unitary evolution",
                        frame.time, len(events),
                    )
            for key, value in values.items():
                series[key][next_record] = value
            next_record += 1

    next_record = 0
    tie = 1e-9 * cfg.dt
    # evolve to each event, record on the way, then project the chosen sites
    for event_index, t_event in enumerate(event_times):
        record_until(t_event - tie)
        frame.advance(t_event)

        sites = sample_measured_sites(outcome_rng, n_qubits, cfg.p_m)
        outcomes = ()
        if sites:
            projected, outcomes = project(frame.computational(), sites, outcome_rng)
            frame.load(projected)
            if cfg.validate_states:
                _check_frame(frame, t_event, event_index)
            if frame.collapse_if_pure():
                logger.debug("state purified at t=%.4f (event %d)", t_event, event_index)
        else:
            logger.debug("empty measurement at t=%.4f (event %d)", t_event, event_index)
        # purity only changes at events
        settled_purity = frame.purity()
        events.append(MeasurementEvent(float(t_event), sites, outcomes, _measure(frame, observables)))

    record_until(np.inf)
    logger.debug("trajectory seed=%d finished with %d events", cfg.seed, len(events))
    return TrajectoryRecord(cfg.seed, cfg, tuple(events), record_times, series)
