"""Shared draw helpers for the test suite."""

import numpy as np
from hypothesis import strategies as st

from thermolam import ModelParams

PLACEMENT_ST = st.sampled_from(["transversal", "rotation", "slip"])
LAW_ST = st.sampled_from(["fourier", "cattaneo"])
ORDER_ST = st.sampled_from(["first_order", "zero_order"])
COEFF_ST = st.floats(0.2, 5.0)
GAMMA_ST = st.floats(0.2, 3.0).flatmap(
    lambda g: st.sampled_from([g, -g])
)
XI_ST = st.floats(-50.0, 50.0)


@st.composite
def params_strategy(draw, placement=None, law=None, order=None):
    law = law or draw(LAW_ST)
    kwargs = dict(
        k1=draw(COEFF_ST),
        k2=draw(COEFF_ST),
        k3=draw(COEFF_ST),
        k4=draw(COEFF_ST),
        gamma=draw(GAMMA_ST),
        placement=placement or draw(PLACEMENT_ST),
        law=law,
        coupling_order=order or draw(ORDER_ST),
    )
    if law == "cattaneo":
        kwargs["k5"] = draw(COEFF_ST)
        kwargs["k4"] = draw(st.sampled_from([1.0, -1.0])) * kwargs["k4"]
    return ModelParams(**kwargs)


def random_params(rng, placement=None, law=None, order=None):
    """Plain RNG analogue of params_strategy for loop-style tests."""
    law = law or ["fourier", "cattaneo"][int(rng.integers(2))]
    k = rng.uniform(0.2, 5.0, size=5)
    kwargs = dict(
        k1=k[0], k2=k[1], k3=k[2], k4=k[3],
        gamma=float(rng.uniform(0.2, 3.0) * (-1.0) ** rng.integers(2)),
        placement=placement or ["transversal", "rotation", "slip"][int(rng.integers(3))],
        law=law,
        coupling_order=order or ["first_order", "zero_order"][int(rng.integers(2))],
    )
    if law == "cattaneo":
        kwargs["k5"] = k[4]
        kwargs["k4"] = float(kwargs["k4"] * (-1.0) ** rng.integers(2))
    return ModelParams(**kwargs)


def random_state(rng, dim):
    u = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return u / np.linalg.norm(u)


def spectrum_distance(a, b):
    """Hausdorff-style gap between two eigenvalue multisets, using an
    optimal pairing so ties in the sort order cannot scramble it."""
    from scipy.optimize import linear_sum_assignment

    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())
