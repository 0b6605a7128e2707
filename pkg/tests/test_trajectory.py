"""
test_trajectory.py - Measurement scheduling, projection and full trajectories
"""

import itertools
from types import SimpleNamespace

import numpy as np
import pytest
from scipy.stats import binom, chisquare

from sykmonitor.core.errors import ConfigError, PreconditionError, StateValidityError
from sykmonitor.core.observables import entanglement_entropy, purity
from sykmonitor.core.seeding import make_generator
from sykmonitor.core.states import QuantumState, StateKind
from sykmonitor.core.syk_model import build_hamiltonian, propagator, sample_couplings
from sykmonitor.core.trajectory import (
    InitialState,
    Observable,
    TrajectoryConfig,
    TrajectoryRecord,
    _check_frame,
    load_record,
    project,
    run_trajectory,
    sample_measured_sites,
    save_record,
    schedule_step,
    schedule_steps,
)

ENTROPY = (Observable.HALF_CHAIN_ENTROPY,)
PURITY = (Observable.PURITY,)


def test_config_validation():
    """Every problem is listed in one ConfigError"""
    with pytest.raises(ConfigError) as info:
        TrajectoryConfig(t_max=10, gamma_m=5.0, p_m=1.5, dt=0.05, record_interval=0.01)
    names = [name for name, _ in info.value.fields]
    assert "gamma_m" in names and "p_m" in names and "record_interval" in names

    cfg = TrajectoryConfig(t_max=10, gamma_m=2.0, p_m=0.5, dt=0.05, record_interval=0.5)
    assert cfg.r_m == pytest.approx(0.1)
    assert cfg.n_steps == 200
    assert len(cfg.record_times()) == 21


def test_schedule_step():
    rng = make_generator(1)
    assert not any(schedule_step(rng, 0.0) for _ in range(100))
    assert all(schedule_step(rng, 1.0) for _ in range(100))

    hits = schedule_steps(make_generator(2), 0.05, 100_000)
    assert hits.mean() == pytest.approx(0.05, abs=0.003)

    # the array form consumes the stream exactly like repeated single draws
    a, b = make_generator(3), make_generator(3)
    assert list(schedule_steps(a, 0.3, 50)) == [schedule_step(b, 0.3) for _ in range(50)]

    with pytest.raises(PreconditionError):
        schedule_step(rng, 1.5)


def test_sample_measured_sites():
    rng = make_generator(4)
    assert sample_measured_sites(rng, 8, 1.0) == tuple(range(1, 9))
    assert sample_measured_sites(rng, 8, 0.0) == ()

    counts = np.array([len(sample_measured_sites(rng, 8, 0.3)) for _ in range(20_000)])
    assert counts.mean() == pytest.approx(2.4, abs=0.04)
    observed = np.bincount(counts, minlength=9)
    expected = binom.pmf(np.arange(9), 8, 0.3) * len(counts)
    # pool the sparse tail so every expected count is large
    observed = np.append(observed[:6], observed[6:].sum())
    expected = np.append(expected[:6], expected[6:].sum())
    assert chisquare(observed, expected).pvalue > 0.01


def test_project_examples():
    rng = make_generator(5)

    # Test 1: the all-up state is an eigenstate of every projector
    up = QuantumState.all_up(3)
    post, outcomes = project(up, (1, 3), rng)
    assert outcomes == (1, 1)
    assert np.allclose(post.data, up.data)

    # Test 2: a Bell pair collapses to a correlated product state
    bell = QuantumState.from_vector(np.array([1, 0, 0, 1]) / np.sqrt(2))
    seen = set()
    for _ in range(40):
        post, outcomes = project(bell, (1, 2), rng)
        assert outcomes[0] == outcomes[1]
        assert np.isclose(abs(post.data[0 if outcomes[0] else 3]), 1)
        seen.add(outcomes)
    assert seen == {(0, 0), (1, 1)}

    # Test 3: full measurement purifies the maximally mixed state
    post, outcomes = project(QuantumState.maximally_mixed(2), (1, 2), rng)
    assert purity(post) == pytest.approx(1.0)
    index = (1 - outcomes[0]) * 2 + (1 - outcomes[1])
    assert post.data[index, index].real == pytest.approx(1.0)

    with pytest.raises(PreconditionError):
        project(up, (), rng)
    with pytest.raises(PreconditionError):
        project(up, (1, 1), rng)


class ScriptedStream:
    """Uniform draws replayed from a list: 0.0 forces outcome 1, 1.0 forces 0"""

    def __init__(self, bits):
        self.draws = [0.0 if bit else 1.0 for bit in bits]

    def random(self):
        return self.draws.pop(0)


def outcome_mask(n, sites, bits):
    index = np.arange(1 << n)
    keep = np.ones(1 << n, dtype=bool)
    for site, bit in zip(sites, bits):
        keep &= (((index >> (n - site)) & 1) == 0) == bool(bit)
    return keep


@pytest.mark.parametrize("pure", [True, False])
def test_projection_enumerates_every_outcome(rng, pure):
    """All 2^3 outcome strings on sites (1, 3, 4) of four qubits, each through project"""
    n, sites = 4, (1, 3, 4)
    if pure:
        psi = rng.normal(size=16) + 1j * rng.normal(size=16)
        state = QuantumState.from_vector(psi / np.linalg.norm(psi))
        rho = np.outer(state.data, state.data.conj())
    else:
        a = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
        state = QuantumState.from_density(a @ a.conj().T / np.trace(a @ a.conj().T).real)
        rho = state.data

    total_weight = 0.0
    average_purity = 0.0
    dephased = np.zeros((16, 16), dtype=complex)
    for bits in itertools.product((1, 0), repeat=len(sites)):
        post, outcomes = project(state, sites, ScriptedStream(bits))
        assert outcomes == bits
        keep = outcome_mask(n, sites, bits)
        block = rho * np.outer(keep, keep)
        weight = np.trace(block).real
        post_rho = np.outer(post.data, post.data.conj()) if pure else post.data
        assert np.allclose(post_rho, block / weight, atol=1e-12)

        total_weight += weight
        dephased += block
        average_purity += weight * purity(post)
    assert total_weight == pytest.approx(1.0)
    assert average_purity >= purity(state) - 1e-12
    assert purity(QuantumState.from_density(dephased)) <= purity(state) + 1e-12


def test_unmonitored_matches_direct_propagation(small_hamiltonian):
    """Gamma_m = 0: no events, and the entropy follows U(t)|up>"""
    cfg = TrajectoryConfig(t_max=4, gamma_m=0.0, p_m=1.0, record_interval=0.5, seed=1)
    record = run_trajectory(small_hamiltonian, cfg, ENTROPY)
    assert record.events == ()
    assert record.series["s_half"][0] == pytest.approx(0, abs=1e-12)

    up = QuantumState.all_up(4).data
    for k in (3, 8):
        psi = propagator(small_hamiltonian, record.t[k]) @ up
        direct = entanglement_entropy(QuantumState.from_vector(psi)).s_half
        assert record.series["s_half"][k] == pytest.approx(direct, abs=1e-9)


def test_mixed_purity_constant_without_measurement(small_hamiltonian):
    cfg = TrajectoryConfig(t_max=5, gamma_m=0.0, p_m=1.0, initial="maximally_mixed", seed=2)
    record = run_trajectory(small_hamiltonian, cfg, PURITY)
    assert np.allclose(record.series["purity"], 1 / 16, atol=1e-10)


def test_full_projection_collapses_entropy(small_hamiltonian):
    """p_m = 1: every event leaves a product state"""
    cfg = TrajectoryConfig(t_max=20, gamma_m=1.0, p_m=1.0, record_interval=0.5, seed=3)
    record = run_trajectory(small_hamiltonian, cfg, ENTROPY)
    assert len(record.events) > 0
    for event in record.events:
        assert event.sites == (1, 2, 3, 4)
        assert event.observables["s_half"] == pytest.approx(0, abs=1e-9)
    assert np.all((record.series["s_half"] >= -1e-12) & (record.series["s_half"] <= 1 + 1e-12))


def test_mixed_start_purifies_once():
    """J = 0 and p_m = 1: purity is one step from 1/16 to 1"""
    h = build_hamiltonian(sample_couplings(8, 0.0, 0))
    cfg = TrajectoryConfig(t_max=20, gamma_m=1.0, p_m=1.0, initial=InitialState.MAXIMALLY_MIXED, seed=4)
    record = run_trajectory(h, cfg, PURITY)
    first = record.events[0].time
    series = record.series["purity"]
    assert np.allclose(series[record.t < first], 1 / 16)
    assert np.allclose(series[record.t >= first], 1.0)
    assert all(event.observables["purity"] == 1.0 for event in record.events)


def test_purity_stays_one_once_reached(small_hamiltonian):
    cfg = TrajectoryConfig(t_max=30, gamma_m=1.0, p_m=0.5, initial="maximally_mixed", seed=5)
    series = run_trajectory(small_hamiltonian, cfg, PURITY).series["purity"]
    reached = np.flatnonzero(series >= 1 - 1e-9)
    if len(reached):
        assert np.all(series[reached[0]:] >= 1 - 1e-9)


def test_trajectory_is_reproducible(small_hamiltonian, tmp_path):
    cfg = TrajectoryConfig(t_max=10, gamma_m=0.5, p_m=0.5, seed=6)
    first = run_trajectory(small_hamiltonian, cfg, ENTROPY)
    second = run_trajectory(small_hamiltonian, cfg, ENTROPY)
    assert first.to_dict() == second.to_dict()

    path = tmp_path / "record.json"
    save_record(first, path)
    loaded = load_record(path)
    assert isinstance(loaded, TrajectoryRecord)
    assert loaded.to_dict() == first.to_dict()


def test_entropy_needs_pure_start(small_hamiltonian):
    cfg = TrajectoryConfig(t_max=1, gamma_m=0.0, p_m=0.5, initial="maximally_mixed")
    with pytest.raises(PreconditionError):
        run_trajectory(small_hamiltonian, cfg, ENTROPY)


def test_event_gaps_are_geometric(small_hamiltonian):
    """About 10^4 events at Gamma_m = 1, dt = 0.05: gaps are whole steps with mean 1/Gamma_m"""
    cfg = TrajectoryConfig(t_max=10_000, gamma_m=1.0, p_m=0.0, dt=0.05, record_interval=100, seed=8)
    record = run_trajectory(small_hamiltonian, cfg, ENTROPY)
    times = np.array([event.time for event in record.events])
    assert len(times) > 9000
    assert all(event.sites == () for event in record.events)

    gaps = np.diff(np.concatenate([[0.0], times]))
    steps = gaps / cfg.dt
    assert np.allclose(steps, np.round(steps), atol=1e-6)
    assert abs(gaps.mean() - 1.0) < 3 * gaps.std() / np.sqrt(len(gaps))
    # P(gap = one step) = r_m
    single = np.mean(np.round(steps) == 1)
    assert abs(single - cfg.r_m) < 3 * np.sqrt(cfg.r_m * (1 - cfg.r_m) / len(gaps))


def test_frame_check_rejects_negative_eigenvalues():
    frame = SimpleNamespace(kind=StateKind.MIXED, data=np.diag([0.6, 0.6, -0.2, 0.0]).astype(complex))
    with pytest.raises(StateValidityError) as info:
        _check_frame(frame, 2.5, 7)
    assert (info.value.time, info.value.event_index) == (2.5, 7)

    frame.data = np.diag([0.5, 0.5, 1e-12, 0.0]).astype(complex)
    _check_frame(frame, 2.5, 7)
    frame.data = np.diag([0.5, 0.5, -1e-11, 1e-11]).astype(complex)
    _check_frame(frame, 2.5, 7)
