import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from loggas.equilibrium import nonconfining_equilibrium
from loggas.measures import (
    ParticleEnsemble,
    QuantileFunction,
    ensemble_from_unsorted,
    load_positions_csv,
    max_asymmetry,
    moment,
    save_positions_csv,
    signed_moment,
    symmetrize,
    w2,
    w2_to_density,
)

positions_strategy = st.lists(
    st.floats(-10, 10), min_size=1, max_size=12, unique=True
).map(sorted)


def ens(values):
    return ParticleEnsemble(np.asarray(values, dtype=float))


def test_invariants_rejected():
    with pytest.raises(ValueError):
        ens([1.0, 1.0])
    with pytest.raises(ValueError):
        ens([2.0, 1.0])
    with pytest.raises(ValueError):
        ens([])


def test_moment_trivial():
    assert moment(ens([-1.0, 1.0]), 2) == 1.0
    assert moment(ens([0.0]), 4) == 0.0
    with pytest.raises(ValueError):
        moment(ens([1.0]), 0.5)


def test_moment_semicircle_sample():
    # independent oracle: m2 of the semicircle by direct quadrature
    m2_exact, _ = quad(lambda x: x * x * np.sqrt(4 - x * x) / (2 * np.pi), -2, 2)
    assert m2_exact == pytest.approx(1.0, abs=1e-10)
    sample = ens(nonconfining_equilibrium(0.0).sample(2000))
    assert moment(sample, 2) == pytest.approx(m2_exact, abs=5e-3)


def test_symmetrize_examples():
    out = symmetrize(ens([-1.1, 0.9]))
    np.testing.assert_allclose(out.positions, [-1.0, 1.0], rtol=0, atol=0)
    sym = ens([-2.0, -1.0, 1.0, 2.0])
    np.testing.assert_array_equal(symmetrize(sym).positions, sym.positions)
    out = symmetrize(ens([-3.0, -1.0, 2.0, 2.5]))
    np.testing.assert_allclose(out.positions, [-2.75, -1.5, 1.5, 2.75], rtol=0, atol=0)


def test_symmetrize_odd_rejected():
    with pytest.raises(ValueError):
        symmetrize(ens([-1.0, 0.0, 1.0]))


def test_symmetrize_exact_antisymmetry_and_odd_moments():
    rng = np.random.default_rng(7)
    base = np.linspace(-2.0, 2.0, 40)
    x = np.sort(base + rng.normal(0.0, 0.01, 40))  # nearly symmetric cloud
    out = symmetrize(ens(x))
    assert max_asymmetry(out) == 0.0
    # signed odd moments vanish exactly under mirror-paired summation
    assert signed_moment(out, 1) == 0.0
    assert signed_moment(out, 3) == 0.0


def test_w2_diracs():
    assert w2(ens([0.0]), ens([3.0])) == 3.0
    assert w2(ens([-1.0, 1.0]), ens([-1.0, 1.0])) == 0.0
    assert w2(ens([-1.0, 1.0]), ens([-2.0, 2.0])) == pytest.approx(1.0, rel=1e-15)


def test_w2_brute_force_two_points():
    # both couplings of two points: monotone matching wins
    a, b = ens([-1.0, 1.0]), ens([-2.0, 2.0])
    monotone = np.sqrt(0.5 * ((-1 + 2) ** 2 + (1 - 2) ** 2))
    crossed = np.sqrt(0.5 * ((-1 - 2) ** 2 + (1 + 2) ** 2))
    assert w2(a, b) == pytest.approx(min(monotone, crossed), rel=1e-15)


@settings(max_examples=60, deadline=None)
@given(
    a=st.lists(st.floats(-5, 5), min_size=2, max_size=6, unique=True),
    b=st.lists(st.floats(-5, 5), min_size=2, max_size=6, unique=True),
)
def test_w2_equals_bruteforce_minimum(a, b):
    n = min(len(a), len(b))
    ea, eb = ens(sorted(a)[:n]), ens(sorted(b)[:n])
    best = min(
        float(np.sqrt(np.mean((ea.positions - np.array(perm)) ** 2)))
        for perm in itertools.permutations(eb.positions)
    )
    assert w2(ea, eb) == pytest.approx(best, rel=1e-12, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(
    a=positions_strategy, b=positions_strategy, c=positions_strategy
)
def test_w2_metric_properties(a, b, c):
    n = min(len(a), len(b), len(c))
    ea, eb, ec = ens(a[:n]), ens(b[:n]), ens(c[:n])
    assert w2(ea, ea) == 0.0
    assert w2(ea, eb) == pytest.approx(w2(eb, ea), rel=1e-12, abs=1e-15)
    assert w2(ea, ec) <= w2(ea, eb) + w2(eb, ec) + 1e-9


def test_w2_mismatched_sizes_quantile_duplication():
    # {0} vs {-1, 1}: quantile duplication gives mean squared distance 1
    assert w2(ens([0.0]), ens([-1.0, 1.0])) == pytest.approx(1.0, rel=1e-15)


def test_w2_to_density_uniform():
    q = QuantileFunction(lambda u: 2 * u - 1, -1.0, 1.0)
    val = w2_to_density(ens([-1.0, 1.0]), q)
    assert val == pytest.approx(0.5, rel=1e-15)


def test_w2_to_density_own_quantiles_is_zero():
    sc = nonconfining_equilibrium(0.0)
    sample = ens(sc.sample(64))
    assert w2_to_density(sample, sc.quantile) <= 1e-12


def test_w2_to_density_semicircle_discretization():
    sc = nonconfining_equilibrium(0.0)
    sample = ens(sc.sample(1000))
    assert w2_to_density(sample, sc.quantile) <= 0.01


def test_quantile_function_validation():
    with pytest.raises(ValueError):
        QuantileFunction(lambda u: -u, 0.0, 1.0)  # decreasing
    with pytest.raises(ValueError):
        QuantileFunction(lambda u: 5 * u, 0.0, 1.0)  # leaves support
    q = QuantileFunction(lambda u: u, 0.0, 1.0)
    with pytest.raises(ValueError):
        q(1.5)


def test_csv_roundtrip(tmp_path):
    e = ens(np.sort(np.random.default_rng(3).normal(size=17)))
    path = tmp_path / "positions.csv"
    save_positions_csv(e, path)
    loaded = load_positions_csv(path)
    np.testing.assert_array_equal(loaded.positions, e.positions)


def test_ensemble_from_unsorted():
    e = ensemble_from_unsorted([3.0, -1.0, 0.5])
    np.testing.assert_array_equal(e.positions, [-1.0, 0.5, 3.0])
