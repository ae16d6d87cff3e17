import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from loggas.constants import certified_rate
from loggas.dynamics import SimulationConfig, Trajectory, simulate
from loggas.equilibrium import confining_equilibrium
from loggas.functionals import entropy_discrete, fisher_discrete
from loggas.measures import ParticleEnsemble
from loggas.potentials import quartic_confining
from loggas.verifier import (
    check_hwi,
    check_hwi_pairs,
    check_logsob,
    check_transport,
    discretization_floor,
    fit_exponential_rate,
    verify_convergence,
)


def ens(values):
    return ParticleEnsemble(np.asarray(values, dtype=float))


def synthetic_traj(times, entropy, fisher, w2, target_entropy=0.0, meta=None):
    times = np.asarray(times, dtype=float)
    full_meta = {"target_discrete_entropy": target_entropy, "config": {"seed": 0}}
    if meta:
        full_meta.update(meta)
    return Trajectory(
        times=times,
        m2=np.ones_like(times),
        entropy=np.asarray(entropy, dtype=float),
        fisher=np.asarray(fisher, dtype=float),
        w2=np.asarray(w2, dtype=float),
        support_radius=np.ones_like(times),
        snapshots=[],
        meta=full_meta,
    )


def test_fit_exact_exponential():
    t = np.linspace(0, 5, 60)
    rate, intercept, r2 = fit_exponential_rate(t, np.exp(-3 * t))
    assert rate == pytest.approx(3.0, abs=1e-10)
    assert intercept == pytest.approx(0.0, abs=1e-10)
    assert r2 == pytest.approx(1.0, abs=1e-12)


def test_fit_constant_series():
    t = np.linspace(0, 5, 20)
    rate, _, r2 = fit_exponential_rate(t, np.full_like(t, 0.7))
    assert rate == pytest.approx(0.0, abs=1e-12)
    assert r2 == 1.0


def test_fit_noisy_exponential_with_floor():
    rng = np.random.default_rng(11)
    t = np.linspace(0, 4, 200)
    values = np.exp(-3 * t) + rng.uniform(0, 1e-6, t.size)
    rate, _, _ = fit_exponential_rate(t, values, floor=1e-4)
    assert rate == pytest.approx(3.0, abs=0.05)


def test_fit_too_few_points():
    with pytest.raises(ValueError):
        fit_exponential_rate([0, 1, 2], [1.0, 1e-12, 1e-12], floor=1e-8)


@settings(max_examples=25, deadline=None)
@given(rate=st.floats(0.1, 10), scale=st.floats(0.1, 100))
def test_fit_recovers_synthetic_rates(rate, scale):
    t = np.linspace(0, 3, 40)
    fitted, _, r2 = fit_exponential_rate(t, scale * np.exp(-rate * t))
    assert fitted == pytest.approx(rate, rel=1e-8)
    assert r2 == pytest.approx(1.0, abs=1e-10)


def test_check_hwi_identical_measures():
    e = ens(np.linspace(-1, 1, 10))
    assert check_hwi(e, e, quartic_confining(-0.001), 0.001) == pytest.approx(0.0, abs=1e-12)


def test_check_hwi_rejects_asymmetric():
    with pytest.raises(ValueError):
        check_hwi(ens([-1.0, 2.0]), ens([-1.0, 1.0]), quartic_confining(0.0), 0.001)


def test_check_hwi_equilibrium_vs_state():
    eq = confining_equilibrium(-0.001)
    V = eq.potential()
    rho0 = ens(eq.sample(500))
    rho1 = ens(eq.sample(500) * 1.15)
    margin = check_hwi(rho0, rho1, V, 0.0011180)
    assert margin >= -0.02


def test_check_logsob_pass_and_flip():
    # gradient-flow-like series: Sigma_rel = e^{-2t}, D = 2 e^{-2t}
    t = np.linspace(0, 5, 100)
    rel = np.exp(-2 * t)
    traj = synthetic_traj(t, rel, 2 * rel, np.sqrt(rel), target_entropy=0.0)
    ok = check_logsob(traj, lam=0.25)  # 4*0.25*rel = rel <= 2 rel
    assert ok.status == "pass"
    flipped = check_logsob(traj, lam=250.0)  # inflated: 1000 rel > 2 rel
    assert flipped.status == "fail"
    assert flipped.worst_margin < ok.worst_margin


def test_check_transport_pass_and_flip():
    t = np.linspace(0, 5, 100)
    rel = np.exp(-2 * t)
    w2 = np.sqrt(rel)  # saturates W2 = sqrt(rel/lam) at lam = 1
    traj = synthetic_traj(t, rel, 2 * rel, w2, target_entropy=0.0)
    ok = check_transport(traj, lam=0.25)  # rhs = 2 w2 >= w2
    assert ok.status == "pass"
    flipped = check_transport(traj, lam=250.0)  # rhs = w2/31.6 << w2
    assert flipped.status == "fail"
    assert flipped.worst_margin < ok.worst_margin


def test_check_transport_clamps_negative_relative_entropy():
    t = np.linspace(0, 1, 10)
    rel = np.full_like(t, -1e-6)  # estimator bias below zero
    traj = synthetic_traj(t, rel, np.zeros_like(t), np.full_like(t, 1e-3))
    rec = check_transport(traj, lam=0.001)
    assert rec.status == "pass"  # -1e-3 is absorbed by the tolerance


def test_discretization_floor():
    t = np.linspace(0, 1, 5)
    traj = synthetic_traj(t, np.ones_like(t), np.ones_like(t), [0.5, 0.1, 0.02, 0.01, 0.011])
    assert discretization_floor(traj) == pytest.approx(1.25 * 0.01)


def real_small_run():
    cfg = SimulationConfig(
        n_particles=200,
        potential=quartic_confining(-0.001),
        init={"kind": "uniform", "m": 2.0},
        t_end=4.0,
        dt_init=0.01,
        record_every=0.01,
        snapshot_every=0.25,
        symmetrize_each_step=True,
        seed=7,
    )
    return simulate(cfg)


@pytest.fixture(scope="module")
def small_run():
    return real_small_run()


def test_verify_convergence_report(small_run):
    rates = certified_rate(quartic_confining(-0.001), float(small_run.m2[0]))
    report = verify_convergence(small_run, rates, potential=quartic_confining(-0.001))
    names = {c.name for c in report.checks}
    assert {"rate_vs_certified", "decay_envelope", "m2_bound",
            "entropy_monotone", "log_sobolev", "transportation", "hwi_pairs"} <= names
    assert report.all_passed
    assert report.fitted_rate is not None and report.fitted_rate >= rates.rate_2lambda
    assert report.certified_rate_2lambda == pytest.approx(2 * rates.lam)
    payload = report.to_dict()
    assert payload["all_passed"] is True
    lines = report.summary_lines()
    assert any("log_sobolev" in line for line in lines)


def test_verify_convergence_inflation_response(small_run):
    rates = certified_rate(quartic_confining(-0.001), float(small_run.m2[0]))
    base = verify_convergence(small_run, rates, potential=quartic_confining(-0.001))
    assert base.all_passed
    # margins respond monotonically to inflating lambda where Sigma_rel > 0
    rel0 = float(small_run.entropy[0] - small_run.meta["target_discrete_entropy"])
    d0 = float(small_run.fisher[0])
    assert rel0 > 0
    assert d0 - 4 * (1000 * rates.lam) * rel0 < d0 - 4 * rates.lam * rel0
    # a large enough inflation defeats the suite on a genuine relaxation run
    defeated = verify_convergence(
        small_run, rates, potential=quartic_confining(-0.001), lambda_scale=1e6
    )
    by_name = {c.name: c for c in defeated.checks}
    assert by_name["log_sobolev"].status == "fail"
    assert by_name["decay_envelope"].status == "fail"
    assert not defeated.all_passed


def test_check_hwi_pairs_on_run(small_run):
    rec = check_hwi_pairs(small_run, quartic_confining(-0.001), 0.001118, n_pairs=25, seed=3)
    assert rec.status == "pass"
    assert rec.worst_margin >= -0.02


def test_verify_deterministic(small_run):
    rates = certified_rate(quartic_confining(-0.001), float(small_run.m2[0]))
    r1 = verify_convergence(small_run, rates, potential=quartic_confining(-0.001))
    r2 = verify_convergence(small_run, rates, potential=quartic_confining(-0.001))
    assert r1.to_dict() == r2.to_dict()


def test_skipped_checks_without_rates(small_run):
    report = verify_convergence(small_run, None)
    by_name = {c.name: c for c in report.checks}
    assert by_name["rate_vs_certified"].status == "skipped"
    assert by_name["m2_bound"].status == "skipped"
    assert report.all_passed  # skipped checks do not fail the suite
