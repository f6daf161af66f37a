import os

import numpy as np
import pytest
from scipy import stats
from scipy.linalg import expm

from nextjump.atom3 import Atom3Params, effective_model
from nextjump.numerics import RngStream
from nextjump.trajectories import (BISECT_ITERS, EIG_COND_LIMIT,
                                   EffectiveModel, JumpRecord, NullFlow,
                                   ensemble_map, lindblad_consistency,
                                   run_trajectory, sample_gaps,
                                   sample_next_jump, telegraph_run,
                                   telegraph_stats, thread_count)


def _pilot_model():
    p = Atom3Params(omega1=5.0, omega2=0.05, delta2=5.0, beta1=1.0, beta2=0.0)
    return effective_model(p)


def test_null_flow_matches_expm():
    gen = np.array([[-0.2 + 1j, 0.5], [0.1, -1.0 - 0.3j]], dtype=complex)
    psi0 = np.array([1.0, 0.5j], dtype=complex)
    flow = NullFlow(gen, psi0)
    for t in (0.3, 1.7):
        want = expm(gen * t) @ psi0
        assert np.max(np.abs(flow.state(t) - want)) < 1e-10
    assert abs(flow.survival(0.0) - 1.0) < 1e-12


def test_null_flow_state_shapes():
    gen = -0.5 * np.eye(2, dtype=complex)
    flow = NullFlow(gen, np.array([1.0, 0.0], dtype=complex))
    assert flow.state(1.0).shape == (2,)
    assert flow.state(np.array([0.5, 1.0, 2.0])).shape == (2, 3)
    w = flow.survival(np.array([1.0, 2.0]))
    assert np.allclose(w, np.exp([-1.0, -2.0]))


def test_sample_gaps_inverts_pure_decay():
    # survival e^{-t}: inverse transform gives exactly -log(u)
    n = 2000
    got = sample_gaps(lambda t: np.exp(-t), n, RngStream(0, 0), t_hi=60.0)
    want = -np.log(RngStream(0, 0).generator().random(n))
    assert np.max(np.abs(got - want)) < 1e-9


def test_sample_gaps_ks_against_cdf():
    got = sample_gaps(lambda t: np.exp(-t), 100_000, RngStream(1, 0), t_hi=60.0)
    d, p = stats.kstest(got, "expon")
    assert d < 0.005
    assert p > 0.01


def test_sample_gaps_accepts_generator():
    a = sample_gaps(lambda t: np.exp(-t), 16, RngStream(3, 0), t_hi=60.0)
    b = sample_gaps(lambda t: np.exp(-t), 16, RngStream(3, 0).generator(),
                    t_hi=60.0)
    assert np.array_equal(a, b)


def test_sample_next_jump_and_run_trajectory():
    model = _pilot_model()
    t, state = sample_next_jump(model, model.initial_state, RngStream(4, 0),
                                tmax=900.0)
    assert t is not None and t > 0
    # unnormalized conditioned state: its norm^2 is the drawn survival level
    u = float(RngStream(4, 0).generator().random())
    assert abs(np.vdot(state, state).real - u) < 1e-6

    rec = run_trajectory(model, 200.0, RngStream(4, 1))
    assert rec.tmax == 200.0
    assert np.all(np.diff(rec.times) > 0)
    assert rec.times[-1] <= 200.0
    assert np.allclose(rec.gaps(), np.diff(rec.times, prepend=0.0))
    assert rec.channels.shape == rec.times.shape


def test_telegraph_run_deterministic():
    model = _pilot_model()
    r1 = telegraph_run(model, 500.0, RngStream(2, 0))
    r2 = telegraph_run(model, 500.0, RngStream(2, 0))
    assert np.array_equal(r1.times, r2.times)
    assert np.array_equal(r1.channels, r2.channels)


def test_telegraph_stats_consistency():
    model = _pilot_model()
    rec = telegraph_run(model, 2000.0, RngStream(2, 0))
    st = telegraph_stats(rec, dark_threshold=10.0)
    assert 0.0 < st.p_dark < 1.0
    assert st.p_dark_se > 0.0
    assert st.n_dark == st.dark_durations.size
    assert np.all(st.dark_durations > st.threshold)
    assert set(st.branch_fractions) <= set(model.labels)
    if st.n_dark:
        assert abs(sum(st.branch_fractions.values()) - 1.0) < 1e-12
    # dark fraction is time share: durations over total time
    assert abs(st.p_dark - st.dark_durations.sum() / rec.times[-1]) < 1e-2


def test_effective_model_rates_and_reset():
    model = _pilot_model()
    ground = model.initial_state
    # ground state feeds no detector
    assert np.allclose(model.jump_rates(ground), 0.0)
    rng = RngStream(8, 0).generator()
    psi = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    psi /= np.linalg.norm(psi)
    assert model.rate_identity_gap(psi) < 1e-12
    out = model.reset(0, psi)
    assert np.array_equal(out, ground)


def test_jump_record_validates_times():
    with pytest.raises(ValueError):
        JumpRecord(times=[1.0, 1.0], channels=[0, 0], labels=("a",),
                   final_state=np.array([1.0 + 0j]), tmax=2.0)


def test_ensemble_map_slot_ordered():
    got = ensemble_map(lambda i: i * i, 50, max_workers=4)
    assert got == [i * i for i in range(50)]


def test_thread_count_env(monkeypatch):
    monkeypatch.setenv("NEXTJUMP_THREADS", "3")
    assert thread_count() == 3
    monkeypatch.setenv("NEXTJUMP_THREADS", "0")
    assert thread_count() >= 1
    monkeypatch.delenv("NEXTJUMP_THREADS")
    assert 1 <= thread_count() <= 8


def test_lindblad_consistency_small_ensemble():
    p = Atom3Params(omega1=1.0, omega2=0.7, delta2=0.5, beta1=1.0, beta2=0.8)
    rep = lindblad_consistency(effective_model(p), 300, 3.0, seedbase=14)
    assert rep["passed"]
    assert rep["max_deviation"] < rep["tolerance"]
    assert rep["tolerance"] == 5.0 / np.sqrt(300)
    rho = rep["rho_direct"]
    assert abs(np.trace(rho).real - 1.0) < 1e-8
    assert np.max(np.abs(rho - rho.conj().T)) < 1e-10


def test_lindblad_consistency_thread_invariant():
    p = Atom3Params(omega1=1.0, omega2=0.7, delta2=0.5, beta1=1.0, beta2=0.8)
    m = effective_model(p)
    r1 = lindblad_consistency(m, 60, 2.0, seedbase=3, max_workers=1)
    r2 = lindblad_consistency(m, 60, 2.0, seedbase=3, max_workers=4)
    assert np.array_equal(r1["rho_ensemble"], r2["rho_ensemble"])


def test_constants():
    assert BISECT_ITERS == 64
    assert EIG_COND_LIMIT == 1e8
    assert isinstance(_pilot_model(), EffectiveModel)
