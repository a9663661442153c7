import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thermolam import (
    ModelParams,
    Propagator,
    RegimeError,
    UsageError,
    assemble_generator,
    dissipation_residual,
    energy,
    energy_rate,
    energy_weights,
    pointwise_bound_check,
    propagate,
    rk_oracle,
)
from thermolam.evolution import _rk4
from thermolam.model import ETA

from conftest import params_strategy, random_params, random_state


def test_propagate_identity_at_t0():
    p = ModelParams(k2=2.0, k3=3.0)
    u0 = random_state(np.random.default_rng(0), 7)
    np.testing.assert_allclose(propagate(p, 1.5, u0, 0.0), u0, atol=1e-14)


def test_propagate_matches_rk_oracle():
    rng = np.random.default_rng(5)
    for _ in range(20):
        p = random_params(rng)
        xi = float(rng.uniform(-8, 8))
        u0 = random_state(rng, p.dim)
        t = float(rng.uniform(0.1, 0.4))
        A = assemble_generator(p, xi).entries
        step = 0.01 / (1.0 + np.linalg.norm(A, 2))
        gap = np.linalg.norm(propagate(p, xi, u0, t) - rk_oracle(p, xi, u0, t, step))
        assert gap < 1e-8


def test_rk_oracle_fourth_order():
    p = ModelParams(k2=2.0, k3=3.0)
    xi, t = 2.0, 1.0
    u0 = random_state(np.random.default_rng(1), 7)
    exact = propagate(p, xi, u0, t)
    A = assemble_generator(p, xi).entries
    h = 0.08 / (1.0 + np.linalg.norm(A, 2))
    e1 = np.linalg.norm(rk_oracle(p, xi, u0, t, h) - exact)
    e2 = np.linalg.norm(rk_oracle(p, xi, u0, t, h / 2.0) - exact)
    assert 11.0 < e1 / e2 < 21.0


def test_rk_degenerate_zero_generator():
    u0 = np.ones(4, dtype=complex)
    out = _rk4(np.zeros((4, 4), dtype=complex), u0, 3.0, 0.1)
    np.testing.assert_array_equal(out, u0)


def test_rk_step_cap_enforced():
    p = ModelParams(k2=2.0, k3=3.0)
    u0 = np.ones(7, dtype=complex)
    with pytest.raises(UsageError):
        rk_oracle(p, 10.0, u0, 1.0, 0.5)


def test_energy_reference_values():
    p = ModelParams(k1=2.0, k2=3.0, k3=4.0)
    assert energy(p, np.zeros(7)) == 0.0
    u = np.zeros(7, dtype=complex)
    u[1] = 1.0  # velocity slot carries unit weight
    assert energy(p, u) == pytest.approx(0.5)
    v = np.zeros(7, dtype=complex)
    v[0] = 1.0
    assert energy(p, v) == pytest.approx(1.0)  # 0.5 * k1


@given(params_strategy(), st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_energy_equivalent_to_norm(p, seed):
    u = random_state(np.random.default_rng(seed), p.dim)
    w = energy_weights(p)
    e = energy(p, u)
    n2 = float(np.linalg.norm(u) ** 2)
    assert 0.5 * w.min() * n2 - 1e-12 <= e <= 0.5 * w.max() * n2 + 1e-12


def test_energy_rate_vanishes_without_thermal_component():
    p = ModelParams(k2=2.0, k3=3.0)
    u = random_state(np.random.default_rng(3), 7)
    u[ETA] = 0.0
    assert abs(energy_rate(p, 2.0, u)) < 1e-14


def test_energy_conserved_at_zero_frequency():
    p = ModelParams(k2=2.0, k3=3.0)
    u0 = random_state(np.random.default_rng(4), 7)
    e0 = energy(p, u0)
    for t in (1.0, 10.0, 100.0):
        assert energy(p, propagate(p, 0.0, u0, t)) == pytest.approx(e0, rel=1e-10)


def test_energy_nonincreasing_along_flow():
    rng = np.random.default_rng(9)
    for _ in range(15):
        p = random_params(rng)
        xi = float(rng.uniform(-20, 20))
        prop = Propagator(p, xi)
        u0 = random_state(rng, p.dim)
        values = [energy(p, prop.apply(u0, t)) for t in np.linspace(0.0, 20.0, 9)]
        diffs = np.diff(values)
        assert np.all(diffs <= 1e-10 * (1.0 + values[0]))


def test_operator_norm_bounded_by_weight_ratio():
    rng = np.random.default_rng(13)
    for _ in range(15):
        p = random_params(rng)
        w = energy_weights(p)
        bound = np.sqrt(w.max() / w.min())
        prop = Propagator(p, float(rng.uniform(-30, 30)))
        for t in (0.0, 0.5, 5.0, 50.0):
            assert prop.norm(t) <= bound * (1.0 + 1e-10)


def test_semigroup_property():
    rng = np.random.default_rng(17)
    for _ in range(20):
        p = random_params(rng)
        prop = Propagator(p, float(rng.uniform(-20, 20)))
        u0 = random_state(rng, p.dim)
        s, t = rng.uniform(0.1, 3.0, size=2)
        gap = np.linalg.norm(prop.apply(prop.apply(u0, s), t) - prop.apply(u0, s + t))
        assert gap < 1e-9


def test_dissipation_residual_small_across_cases():
    rng = np.random.default_rng(23)
    grid = np.linspace(0.0, 5.0, 11)
    for _ in range(30):
        p = random_params(rng)
        res = dissipation_residual(p, float(rng.uniform(-20, 20)), random_state(rng, p.dim), grid)
        assert res < 1e-12


def test_dissipation_residual_grid_validation():
    p = ModelParams()
    u0 = np.ones(7, dtype=complex)
    with pytest.raises(UsageError):
        dissipation_residual(p, 1.0, u0, [0.0, 1.0])
    with pytest.raises(UsageError):
        dissipation_residual(p, 1.0, u0, [0.0, 2.0, 1.0])


def test_propagator_metadata_and_expm_fallback():
    p = ModelParams(k2=2.0, k3=3.0)
    prop = Propagator(p, 1.3)
    assert prop.method == "eigen"
    assert prop.eigvec_condition > 1.0
    assert prop.cond_threshold == 1e8
    # force the dense-exponential path and check the two routes agree
    forced = Propagator(p, 1.3, cond_threshold=1.0)
    assert forced.method == "expm"
    u0 = random_state(np.random.default_rng(2), 7)
    np.testing.assert_allclose(prop.apply(u0, 2.0), forced.apply(u0, 2.0), atol=1e-10)


def test_state_shape_validation():
    p = ModelParams()
    with pytest.raises(UsageError):
        propagate(p, 1.0, np.ones(8), 1.0)
    with pytest.raises(UsageError):
        energy(p, np.ones((7, 1)))


def test_pointwise_bound_check_small_grid():
    p = ModelParams(k2=2.0, k3=3.0)
    rep = pointwise_bound_check(p, np.geomspace(0.05, 20.0, 25), np.linspace(0.0, 30.0, 31))
    assert rep["c_fit"] > 0.0
    assert rep["ctilde_fit"] >= 1.0
    assert rep["worst_violation"] <= 0.02


def test_pointwise_bound_check_regime_error():
    with pytest.raises(RegimeError):
        pointwise_bound_check(ModelParams(k2=2.0, k3=2.0), [0.1, 1.0], [0.0, 1.0])
