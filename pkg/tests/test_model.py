import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thermolam import (
    ModelParams,
    ParameterError,
    RegimeError,
    assemble_generator,
    classify,
    decay_function,
    dissipation_diagonal,
    energy_weights,
)
from thermolam.model import ETA, PHI, Q, THETA, U, V, Y, Z

from conftest import XI_ST, params_strategy


def test_generator_entries_transversal_fourier():
    p = ModelParams(k2=2.0, k3=3.0)
    A = assemble_generator(p, 2.0).entries
    assert A.shape == (7, 7)
    assert A[U, V] == 2j
    assert A[U, ETA] == -2j
    assert A[ETA, ETA] == -4.0
    assert A[Y, V] == -1.0
    assert A[Y, Z] == 4j
    assert A[THETA, PHI] == 6j
    assert A[V, Y] == 1.0 and A[V, THETA] == 1.0
    # temperature feeds back only through the coupled velocity slot
    assert A[ETA, U] == -2j and A[ETA, Y] == 0.0 and A[ETA, THETA] == 0.0


def test_generator_entries_cattaneo():
    p = ModelParams(k2=2.0, k3=3.0, law="cattaneo", k5=1.0)
    gen = assemble_generator(p, 1.0)
    A = gen.entries
    assert A.shape == (8, 8)
    assert gen.xi == 1.0
    assert A[ETA, Q] == -1j
    assert A[Q, ETA] == -1j
    assert A[Q, Q] == -1.0
    assert A[ETA, ETA] == 0.0


def test_generator_zero_frequency_first_order():
    p = ModelParams(k1=1.7, k2=2.0, k3=3.0)
    A = assemble_generator(p, 0.0).entries
    expected = np.zeros((7, 7), dtype=complex)
    expected[V, Y] = expected[V, THETA] = 1.0
    expected[Y, V] = expected[THETA, V] = -1.7
    np.testing.assert_array_equal(A, expected)


def test_generator_zero_order_coupling_has_no_frequency_factor():
    p = ModelParams(k2=2.0, k3=3.0, gamma=1.5, coupling_order="zero_order")
    A = assemble_generator(p, 0.0).entries
    assert A[U, ETA] == -1.5
    assert A[ETA, U] == 1.5


def test_placement_moves_coupling_slot():
    for placement, slot in (("transversal", U), ("rotation", Y), ("slip", THETA)):
        p = ModelParams(k2=2.0, k3=3.0, placement=placement)
        A = assemble_generator(p, 1.0).entries
        for other in (U, Y, THETA):
            expected = -1j if other == slot else 0.0
            assert A[other, ETA] == expected
            assert A[ETA, other] == expected


@given(params_strategy(), XI_ST)
@settings(max_examples=60, deadline=None)
def test_conjugate_symmetry(p, xi):
    A_plus = assemble_generator(p, xi).entries
    A_minus = assemble_generator(p, -xi).entries
    np.testing.assert_allclose(A_minus, A_plus.conj(), rtol=0, atol=0)


@given(params_strategy(), XI_ST)
@settings(max_examples=100, deadline=None)
def test_dissipation_identity(p, xi):
    # Exact balance: W A + A^H W = -D with D supported on the thermal slot.
    A = assemble_generator(p, xi).entries
    W = np.diag(energy_weights(p))
    D = np.diag(dissipation_diagonal(p, xi))
    gap = np.abs(W @ A + A.conj().T @ W + D).max()
    assert gap <= 1e-14 * (1.0 + np.abs(A).max())


def test_energy_weights_values():
    p = ModelParams(k1=2.0, k2=3.0, k3=4.0)
    np.testing.assert_array_equal(energy_weights(p), [2.0, 1.0, 3.0, 1.0, 4.0, 1.0, 1.0])
    pc = ModelParams(k1=2.0, k2=3.0, k3=4.0, law="cattaneo", k5=1.0)
    np.testing.assert_array_equal(energy_weights(pc), [2.0, 1.0, 3.0, 1.0, 4.0, 1.0, 1.0, 1.0])


def test_dissipation_diagonal_values():
    p = ModelParams(k2=2.0, k3=3.0, k4=0.5)
    d = dissipation_diagonal(p, 3.0)
    assert d[ETA] == 2.0 * 0.5 * 9.0
    assert np.count_nonzero(d) == 1
    pc = ModelParams(k2=2.0, k3=3.0, law="cattaneo", k5=0.7)
    dc = dissipation_diagonal(pc, 3.0)
    assert dc[Q] == 1.4
    assert np.count_nonzero(dc) == 1


def test_decay_function_reference_values():
    assert decay_function(ModelParams(k2=2.0, k3=3.0), 1.0) == pytest.approx(0.2)
    assert decay_function(ModelParams(placement="rotation"), 1.0) == pytest.approx(1.0 / 3.0)
    assert decay_function(
        ModelParams(k1=1.0, k2=2.0, k3=3.0, placement="rotation"), 1.0
    ) == pytest.approx(0.2)
    # zero-order coupling shifts every power up by one
    assert decay_function(
        ModelParams(k2=2.0, k3=3.0, coupling_order="zero_order"), 1.0
    ) == pytest.approx(1.0 / 6.0)
    assert decay_function(
        ModelParams(placement="slip", coupling_order="zero_order"), 1.0
    ) == pytest.approx(0.25)


def test_decay_function_limits():
    p = ModelParams(placement="rotation")
    # equal speeds: profile levels off at 1
    assert decay_function(p, 1e3) == pytest.approx(1.0, rel=1e-5)
    # unequal transversal: falls like 1/xi^2
    pt = ModelParams(k2=2.0, k3=3.0)
    assert decay_function(pt, 1e3) == pytest.approx(1e-6, rel=1e-5)


@given(params_strategy(), st.floats(1e-8, 1e3))
@settings(max_examples=60, deadline=None)
def test_decay_function_even_positive(p, xi):
    tag = classify(p)
    if tag.predicted_regime == "non_decaying":
        with pytest.raises(RegimeError):
            decay_function(p, xi)
        return
    f = decay_function(p, xi)
    assert f > 0.0
    assert decay_function(p, -xi) == f
    assert decay_function(p, 0.0) == 0.0


def test_classify_reference_cases():
    assert classify(ModelParams(k2=2.0, k3=2.0)).predicted_regime == "non_decaying"
    assert classify(ModelParams(k2=2.0, k3=3.0)).predicted_regime == "regularity_loss"
    assert classify(ModelParams(placement="rotation")).predicted_regime == "exponential"
    assert (
        classify(ModelParams(k1=1.0, k2=2.0, k3=3.0, placement="slip")).predicted_regime
        == "regularity_loss"
    )
    # zero-order coupling never gets the exponential tag, even at equal speeds
    assert (
        classify(ModelParams(placement="rotation", coupling_order="zero_order")).predicted_regime
        == "regularity_loss"
    )
    tag = classify(ModelParams(k2=2.0, k3=2.0 + 1e-12))
    assert tag.k2_eq_k3 and tag.predicted_regime == "non_decaying"
    assert tag.k2_k3_gap == pytest.approx(1e-12, rel=1e-3)


@given(params_strategy(), st.floats(1e-3, 1e3))
@settings(max_examples=60, deadline=None)
def test_classify_scale_invariance(p, scale):
    # the speed-coincidence decisions are relative, so rescaling all
    # elastic coefficients together cannot change the tag
    import dataclasses

    q = dataclasses.replace(p, k1=p.k1 * scale, k2=p.k2 * scale, k3=p.k3 * scale)
    a, b = classify(p), classify(q)
    assert a.equal_speeds == b.equal_speeds
    assert a.k2_eq_k3 == b.k2_eq_k3
    assert a.predicted_regime == b.predicted_regime


def test_parameter_validation():
    with pytest.raises(ParameterError):
        ModelParams(k1=0.0)
    with pytest.raises(ParameterError):
        ModelParams(k2=-1.0)
    with pytest.raises(ParameterError):
        ModelParams(gamma=0.0)
    with pytest.raises(ParameterError):
        ModelParams(k4=-1.0)  # fourier law needs k4 > 0
    with pytest.raises(ParameterError):
        ModelParams(k5=1.0)  # k5 is a cattaneo-only coefficient
    with pytest.raises(ParameterError):
        ModelParams(law="cattaneo")  # k5 missing
    with pytest.raises(ParameterError):
        ModelParams(placement="shear")
    with pytest.raises(ParameterError):
        ModelParams(law="cattaneo", k5=1.0, eq_tol=0.0)
    # allowed sign freedom
    ModelParams(gamma=-2.0)
    ModelParams(law="cattaneo", k4=-1.0, k5=1.0)


def test_dim_and_components():
    p = ModelParams()
    assert p.dim == 7
    assert p.components == ("v", "u", "z", "y", "phi", "theta", "eta")
    pc = ModelParams(law="cattaneo", k5=1.0)
    assert pc.dim == 8
    assert pc.components[-1] == "q"
