"""Perturbed-energy certificates for the frequency-wise decay rate.

For each decaying case a Lyapunov candidate L = lam * E + weight(xi) *
corr(xi) is assembled, where E is the frequency-wise energy and corr a
case-specific Hermitian correction built from a small table of
interaction terms (products of two state components with polynomial
coefficients in xi).  The certificate then verifies, numerically and at
matrix level, the two facts the decay estimates rest on:

* equivalence  c3 * E <= L <= c4 * E  with c3 > 0, and
* the decay inequality  dL/dt + c * f(xi) * E <= 0  for some c > 0,

with f the case's frequency profile.  The outer weight ``lam`` is not
chosen in advance: it is doubled until both facts hold, mirroring the
way such proofs absorb generic constants.

The correction tables are transcribed coefficient by coefficient; any
sign defect in a table surfaces as a positive worst margin and is
reported, never silently repaired.  For negative coupling ``gamma``
(and negative ``k4`` with the cattaneo law) the single term whose sign
the derivation flips is multiplied by the corresponding sign, and the
multiplier constraints are stated with absolute values.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ParameterError, RegimeError, UsageError, VerificationError
from .evolution import Propagator
from .model import (
    ETA,
    PHI,
    Q,
    THETA,
    U,
    V,
    Y,
    Z,
    ModelParams,
    assemble_generator,
    classify,
    decay_function,
    dissipation_diagonal,
    energy_weights,
)
from .parallel import parallel_map

# Hard cap on the adaptive doublings of the outer weight.  2**40 of
# headroom is far beyond anything a working certificate needs, so
# hitting the cap is treated as a genuine failure of the candidate.
MAX_DOUBLINGS = 40


@dataclass(frozen=True)
class LyapunovConfig:
    """Multipliers of one perturbed-energy candidate.

    ``lam`` is the outer weight on the energy part (adapted upward by
    :func:`decay_inequality_check`), ``lambda1..lambda5`` the correction
    multipliers, ``lambda6`` the extra flux multiplier used only with
    the cattaneo law, and ``epsilon0`` the slack reserved when the
    dissipated coefficients are balanced.  Which inequalities these
    numbers must satisfy depends on the placement and law; see
    :func:`constraint_margins`.
    """

    lambda1: float
    lambda2: float
    lambda3: float
    lambda4: float
    lambda5: float
    epsilon0: float
    lambda6: float | None = None
    lam: float = 1.0


@dataclass(frozen=True)
class QuadraticForm:
    """Hermitian matrix form of one Lyapunov candidate at one frequency.

    ``L(state) = state^H (lam * energy_part + correction) state`` where
    ``energy_part`` is the diagonal energy matrix W/2 and ``correction``
    already carries the frequency weight.  The two parts are kept
    separate because the outer weight enters linearly and is retuned
    without reassembling the correction.
    """

    xi: float
    lam: float
    energy_part: np.ndarray
    correction: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        """Assembled Hermitian matrix of the full candidate."""
        return self.lam * self.energy_part + self.correction

    def evaluate(self, state) -> float:
        """Value of the candidate on one state (real by Hermiticity)."""
        u = np.asarray(state, dtype=complex)
        return float(np.real(np.conj(u) @ (self.matrix @ u)))


def default_multipliers(params: ModelParams) -> LyapunovConfig:
    """Constraint-satisfying default multipliers for the given case.

    Bounded multiplier windows are filled at their midpoints, unbounded
    ones at twice their lower bound, and ``epsilon0`` at half its
    admissible ceiling.  The result always passes
    :func:`constraint_margins` with strictly positive margins.
    """
    tag = classify(params)
    if tag.predicted_regime == "non_decaying":
        raise RegimeError(
            "no Lyapunov candidate: transversal coupling with matching "
            "k2, k3 does not decay"
        )
    ag = abs(params.gamma)
    if params.placement == "transversal":
        l1, l2, l3, l4 = 0.5, 3.0, 0.5, 1.0
        l5 = 2.0 * l2 / ag
    elif params.placement == "rotation":
        l1, l2, l4, l3 = 0.5, 0.5, 0.25, 0.125
        l5 = 2.0 * (l1 + 1.0) / ag
    else:
        l3, l1, l4, l2 = 0.5, 0.5, 2.0, 0.5
        l5 = 2.0 * (l3 + l4) / ag
    l6 = 2.0 * ag * l5 / abs(params.k4) if params.law == "cattaneo" else None
    config = LyapunovConfig(
        lambda1=l1, lambda2=l2, lambda3=l3, lambda4=l4, lambda5=l5,
        lambda6=l6, epsilon0=1.0,
    )
    ceiling = min(_dissipated_coefficients(params, config).values())
    return replace(config, epsilon0=0.5 * ceiling)


def _dissipated_coefficients(params: ModelParams, config: LyapunovConfig) -> dict:
    """Coefficients of the dissipated quadratic terms, keyed by component.

    These are the quantities whose minimum caps ``epsilon0``; every one
    of them must stay positive (with slack ``epsilon0``) for the
    candidate to close.  Stated with ``|gamma|`` and ``|k4|`` so both
    coupling signs share one table.
    """
    k1, k2, k3 = params.k1, params.k2, params.k3
    ag = abs(params.gamma)
    l1, l2, l3, l4, l5 = (
        config.lambda1, config.lambda2, config.lambda3, config.lambda4,
        config.lambda5,
    )
    if params.placement == "transversal":
        coeffs = {
            "z": k2 * l1,
            "phi": k3 * l3,
            "y": 1.0 - l1,
            "theta": l4 - l3,
            "v": k1 * (l2 - l4 - 1.0),
            "u": ag * l5 - l2,
        }
    elif params.placement == "rotation":
        coeffs = {
            "v": k1 * (1.0 - l2 - l4),
            "z": k2 * l1,
            "theta": l4 - l3,
            "u": l2,
            "phi": k3 * l3,
            "y": ag * l5 - l1 - 1.0,
        }
    else:
        coeffs = {
            "phi": k3 * l3,
            "u": l2,
            "y": 1.0 - l1,
            "z": k2 * l1,
            "v": k1 * (l4 - l2 - 1.0),
            "theta": ag * l5 - l3 - l4,
        }
    if params.law == "cattaneo":
        if config.lambda6 is None:
            raise UsageError("lambda6 is required for the cattaneo law")
        coeffs["eta"] = abs(params.k4) * config.lambda6 - ag * l5
    return coeffs


def constraint_margins(params: ModelParams, config: LyapunovConfig) -> dict:
    """All quantities the multiplier choice requires to be positive.

    Returns a name -> value map combining the structural window
    constraints of the case (each multiplier inside its interval) and
    the slack of every dissipated coefficient over ``epsilon0``.  The
    candidate is admissible iff every value is strictly positive.
    """
    l1, l2, l3, l4 = config.lambda1, config.lambda2, config.lambda3, config.lambda4
    if params.placement == "transversal":
        margins = {
            "lambda1": l1,
            "one_minus_lambda1": 1.0 - l1,
            "lambda2_minus_one": l2 - 1.0,
            "lambda3": l3,
            "lambda4_minus_lambda3": l4 - l3,
            "lambda2_window": l2 - 1.0 - l4,
        }
    elif params.placement == "rotation":
        margins = {
            "lambda1": l1,
            "lambda2": l2,
            "one_minus_lambda2": 1.0 - l2,
            "lambda3": l3,
            "lambda4_minus_lambda3": l4 - l3,
            "lambda4_window": 1.0 - l2 - l4,
        }
    else:
        margins = {
            "lambda3": l3,
            "lambda1": l1,
            "one_minus_lambda1": 1.0 - l1,
            "lambda4_minus_one": l4 - 1.0,
            "lambda2": l2,
            "lambda2_window": l4 - 1.0 - l2,
        }
    margins["epsilon0"] = config.epsilon0
    margins["lam"] = config.lam
    for name, coeff in _dissipated_coefficients(params, config).items():
        margins[f"slack_{name}"] = coeff - config.epsilon0
    return margins


def _validate(params: ModelParams, config: LyapunovConfig) -> None:
    bad = {k: v for k, v in constraint_margins(params, config).items() if v <= 0.0}
    if bad:
        listing = ", ".join(f"{k}={v:.3g}" for k, v in sorted(bad.items()))
        raise UsageError(f"multiplier constraints violated: {listing}")


def lyapunov_weight(params: ModelParams, xi: float) -> float:
    """Frequency weight multiplying the correction inside L."""
    x2 = float(xi) * float(xi)
    if params.placement == "transversal":
        return 1.0 / (1.0 + x2 + x2**2 + x2**3 + x2**4)
    if classify(params).equal_speeds:
        tf = 1.0 + x2 + x2**2
    else:
        tf = 1.0 + x2 + x2**2 + x2**3 + x2**4
    if params.law == "fourier":
        return x2 / tf
    return 1.0 / tf


def _terms_transversal(params: ModelParams, config: LyapunovConfig, x: float) -> list:
    k1, k2, k3, g = params.k1, params.k2, params.k3, params.gamma
    l1, l2, l3, l4, l5 = (
        config.lambda1, config.lambda2, config.lambda3, config.lambda4,
        config.lambda5,
    )
    sg = 1.0 if g > 0.0 else -1.0
    dk = k2 - k3
    x2 = x * x
    x4 = x2 * x2
    i1 = k2 * x2 - k1 * l1 - (l4 + 1.0) * k1 * k2 / dk
    i2 = k3 * l4 * x2 - k1 * l3 + (l4 + 1.0) * k1 * k3 / dk
    i3 = l2 + i2 / k1 - l4 * x2
    i4 = l2 + i1 / k1 - x2
    terms = [
        (l1 * x * x4, "im", Y, Z),
        (l3 * x * x4, "im", THETA, PHI),
        (-l4 * x2 * x4, "re", THETA, V),
        (-(l4 + 1.0) * k2 / dk * x * x4, "im", Z, THETA),
        ((l4 + 1.0) * k3 / dk * x * x4, "im", PHI, Y),
        (-x2 * x4, "re", Y, V),
        (l2 * x * x4, "im", U, V),
        (-i1 / k1 * x4, "re", U, Z),
        (-i2 / k1 * x4, "re", U, PHI),
        (sg * l5 * x * x4, "im", U, ETA),
        (i3 / g * x4, "re", ETA, THETA),
        (i4 / g * x4, "re", ETA, Y),
    ]
    if params.law == "cattaneo":
        k4 = params.k4
        sk = 1.0 if k4 > 0.0 else -1.0
        i5 = (g * l2 - k1 * l5) * x2 - (k1 / g) * (i3 + i4)
        i6 = (g / k1) * i2 - (k3 / g) * i3
        i7 = (g / k1) * i1 - (k2 / g) * i4
        terms += [
            (sk * config.lambda6 * x * x4, "im", ETA, Q),
            (i5 / k4 * x * x2, "im", V, Q),
            (i6 / k4 * x4, "re", PHI, Q),
            (i7 / k4 * x4, "re", Z, Q),
        ]
    return terms


def _terms_rotation(params: ModelParams, config: LyapunovConfig, x: float) -> list:
    k1, k2, k3, g = params.k1, params.k2, params.k3, params.gamma
    l1, l2, l3, l4, l5 = (
        config.lambda1, config.lambda2, config.lambda3, config.lambda4,
        config.lambda5,
    )
    sg = 1.0 if g > 0.0 else -1.0
    x2 = x * x
    c2 = (k2 / (k1 * k3)) * (k3 * l4 * x2 - k1 * l3)
    c3 = -(k2 / k3) * (l4 * x2 + l2)
    i1 = (
        1.0 - l4
        + (k2 / (k1 * k3)) * (k3 / k2 - 1.0) * (k3 * l4 * x2 - k1 * l3)
        + (k2 / k3 - 1.0) * l4 * x2
        + (k2 / k3 - 1.0) * l2
    )
    i2 = (
        ((k2 / k3 - k2 / k1) * l4 + k2 / k1 - 1.0) * x2
        + l1 + (k2 / k3 + 1.0) * l2 + (k2 / k3) * l3
    )
    terms = [
        (l1 * x, "im", Y, Z),
        (-l2 * x, "im", U, V),
        (l3 * x, "im", THETA, PHI),
        (-l4 * x2, "re", THETA, V),
        (x2, "re", Y, V),
        ((k2 / k1) * x2 + l1, "re", U, Z),
        (c2 * x, "im", Z, THETA),
        (-c2, "re", U, Z),
        (-c2 * (k3 / k2) * x, "im", PHI, Y),
        (c3 * x, "im", Z, THETA),
        (-c3, "re", U, Z),
        (-c3 * (k3 / k2) * x, "im", PHI, Y),
        (c3 * (k3 / k2), "re", U, PHI),
        (sg * l5 * x, "im", Y, ETA),
        (-i1 / g * x, "im", ETA, THETA),
        (i2 / g, "re", U, ETA),
    ]
    if params.law == "cattaneo":
        k4 = params.k4
        sk = 1.0 if k4 > 0.0 else -1.0
        i3 = g * (1.0 - k3 / k1) * l4 * x2 + g * (l2 + l3)
        terms = [(c * x2, kind, a, b) for c, kind, a, b in terms]
        terms += [
            (sk * config.lambda6 * x * x2, "im", ETA, Q),
            (((k1 / g) * (i1 - i2) + (k1 * l5 - g * l4) * x2) * x2 / k4, "re", V, Q),
            (-(i3 + (k3 / g) * i1) * x * x2 / k4, "im", PHI, Q),
            ((k2 * l5 - g * l1) * x * x2 / k4, "im", Z, Q),
        ]
    return terms


def _terms_slip(params: ModelParams, config: LyapunovConfig, x: float) -> list:
    k1, k2, k3, g = params.k1, params.k2, params.k3, params.gamma
    l1, l2, l3, l4, l5 = (
        config.lambda1, config.lambda2, config.lambda3, config.lambda4,
        config.lambda5,
    )
    sg = 1.0 if g > 0.0 else -1.0
    x2 = x * x
    c2 = -(k2 * x2 - k1 * l1) / k1
    c3 = x2 + l2
    i1 = (
        ((k3 / k2 - 1.0) * l4 + k3 / k2 - k3 / k1) * x2
        + (k3 / k2) * l1 + (k3 / k2 + 1.0) * l2 + l3
    )
    i3 = (
        (k3 / k2 - 1.0) * (x2 + l2)
        + (1.0 - k3 / k2) * ((k2 / k1) * x2 - l1)
        + l4 - 1.0
    )
    terms = [
        (l1 * x, "im", Y, Z),
        (-l2 * x, "im", U, V),
        (l3 * x, "im", THETA, PHI),
        (l4 * x2, "re", THETA, V),
        (-x2, "re", Y, V),
        ((k3 / k1) * l4 * x2 + l3, "re", U, PHI),
        (c2 * x, "im", Z, THETA),
        (-c2 * (k3 / k2) * x, "im", PHI, Y),
        (c2 * (k3 / k2), "re", U, PHI),
        (c3 * x, "im", Z, THETA),
        (-c3 * (k3 / k2) * x, "im", PHI, Y),
        (c3 * (k3 / k2), "re", U, PHI),
        (-c3, "re", U, Z),
        (sg * l5 * x, "im", THETA, ETA),
        (i1 / g, "re", U, ETA),
        (-i3 / g * x, "im", ETA, Y),
    ]
    if params.law == "cattaneo":
        k4 = params.k4
        sk = 1.0 if k4 > 0.0 else -1.0
        i2 = g * ((1.0 - k2 / k1) * x2 + l1 + l2)
        terms = [(c * x2, kind, a, b) for c, kind, a, b in terms]
        terms += [
            (sk * config.lambda6 * x * x2, "im", ETA, Q),
            (((k1 * i3 - i1) / g + (k1 * l5 - g * l4) * x2) * x2 / k4, "re", V, Q),
            ((g * l3 - k3 * l5) * x * x2 / k4, "im", PHI, Q),
            (-(i2 + (k2 / g) * i3) * x * x2 / k4, "im", Z, Q),
        ]
    return terms


_TERM_TABLES = {
    "transversal": _terms_transversal,
    "rotation": _terms_rotation,
    "slip": _terms_slip,
}


def _correction_matrix(params: ModelParams, config: LyapunovConfig, x: float) -> np.ndarray:
    """Unweighted Hermitian matrix of the case's correction functional.

    Each table entry (c, "re", a, b) contributes c * Re(U_a * conj(U_b))
    to the form, each (c, "im", a, b) contributes c * Re(i * U_a *
    conj(U_b)); both are realized as the obvious rank-two Hermitian
    blocks.
    """
    n = params.dim
    corr = np.zeros((n, n), dtype=complex)
    for c, kind, a, b in _TERM_TABLES[params.placement](params, config, x):
        if kind == "re":
            corr[b, a] += 0.5 * c
            corr[a, b] += 0.5 * c
        else:
            corr[b, a] += 0.5j * c
            corr[a, b] += -0.5j * c
    return corr


def assemble_quadratic_form(
    params: ModelParams, config: LyapunovConfig, xi: float, validate: bool = True
) -> QuadraticForm:
    """Assemble the Lyapunov candidate at one frequency.

    Raises :class:`UsageError` when the multipliers violate the case's
    constraint set (skip with ``validate=False`` inside sweeps that
    validated once), and :class:`RegimeError` for a non-decaying case.
    At ``xi = 0`` the correction vanishes identically and the candidate
    reduces to ``lam`` times the energy.
    """
    tag = classify(params)
    if tag.predicted_regime == "non_decaying":
        raise RegimeError(
            "no Lyapunov candidate: transversal coupling with matching "
            "k2, k3 does not decay"
        )
    if validate:
        _validate(params, config)
    x = float(xi)
    energy_part = np.diag(0.5 * energy_weights(params)).astype(complex)
    corr = lyapunov_weight(params, x) * _correction_matrix(params, config, x)
    corr = 0.5 * (corr + corr.conj().T)
    return QuadraticForm(xi=x, lam=config.lam, energy_part=energy_part, correction=corr)


def _pencil_range(mat: np.ndarray, half_weights: np.ndarray) -> tuple:
    """Extreme generalized Rayleigh quotients of ``mat`` against diag(half_weights)."""
    scale = 1.0 / np.sqrt(half_weights)
    sym = scale[:, None] * mat * scale[None, :]
    vals = np.linalg.eigvalsh(0.5 * (sym + sym.conj().T))
    return float(vals[0]), float(vals[-1])


def equivalence_constants(
    params: ModelParams, config: LyapunovConfig, xi_grid, threads=None
) -> tuple:
    """Certified constants (c3, c4) with c3*E <= L <= c4*E on the grid.

    Computed as the extreme generalized Rayleigh quotients of the
    candidate against the energy over all grid frequencies.  A
    non-positive lower constant means the outer weight ``lam`` is too
    small for the correction and is reported as
    :class:`ParameterError`; callers should double ``lam`` and retry.
    """
    xi = np.asarray(xi_grid, dtype=float)
    if xi.ndim != 1 or xi.size == 0 or not np.all(np.isfinite(xi)):
        raise UsageError("xi_grid must be a nonempty finite 1-d grid")
    _validate(params, config)
    half_w = 0.5 * energy_weights(params)

    def worker(x):
        form = assemble_quadratic_form(params, config, x, validate=False)
        return _pencil_range(form.matrix, half_w)

    ranges = parallel_map(worker, xi, threads=threads)
    c3 = min(lo for lo, _ in ranges)
    c4 = max(hi for _, hi in ranges)
    if c3 <= 0.0:
        raise ParameterError(
            f"outer weight lam={config.lam:.6g} too small: candidate loses "
            f"positivity (c3={c3:.3e}); raise lam"
        )
    return c3, c4


def correction_bound(
    params: ModelParams, config: LyapunovConfig, xi_grid, threads=None
) -> float:
    """Smallest grid constant b with |L - lam*E| <= b*E.

    The weighted correction is uniformly energy-bounded, which is what
    makes the equivalence constants approach ``lam`` as ``lam`` grows;
    the returned bound quantifies that: c4 <= lam + b and c3 >= lam - b.
    """
    xi = np.asarray(xi_grid, dtype=float)
    if xi.ndim != 1 or xi.size == 0 or not np.all(np.isfinite(xi)):
        raise UsageError("xi_grid must be a nonempty finite 1-d grid")
    _validate(params, config)
    half_w = 0.5 * energy_weights(params)

    def worker(x):
        form = assemble_quadratic_form(params, config, x, validate=False)
        lo, hi = _pencil_range(form.correction, half_w)
        return max(abs(lo), abs(hi))

    return float(max(parallel_map(worker, xi, threads=threads)))


def derivative_form(params: ModelParams, form: QuadraticForm) -> np.ndarray:
    """Hermitian matrix M with dL/dt = state^H M state along trajectories.

    Computed exactly from the generator as Q A + A^H Q; no finite
    differences are involved.
    """
    a = assemble_generator(params, form.xi).entries
    q = form.matrix
    m = q @ a + a.conj().T @ q
    return 0.5 * (m + m.conj().T)


def decay_inequality_check(
    params: ModelParams,
    config: LyapunovConfig,
    xi_grid,
    t_grid,
    n_states: int = 10,
    seed: int = 0,
    threads=None,
) -> dict:
    """Certify dL/dt + c * f(xi) * E <= 0 and fit the best grid constant c.

    Works at matrix level first: for each grid frequency the derivative
    matrix ``M = Q A + A^H Q`` must be negative definite against the
    energy, which pins the largest admissible rate
    ``c = min_xi(-rmax(xi) / f(xi))`` over the whole grid (``rmax`` the
    top generalized eigenvalue of M against E).  The outer weight is
    doubled, at most ``MAX_DOUBLINGS`` times, until both this and the
    positivity of the equivalence constant hold; exhausting the budget
    raises :class:`VerificationError` naming the worst frequency.

    The fitted rate is then re-checked along exact trajectories from
    ``n_states`` random unit states per frequency at all grid times;
    the returned ``worst_margin`` is the largest sampled value of
    ``dL/dt + c_fit * f * E`` (certified <= 0 up to the fit backoff).

    Returns ``{"c_fit", "worst_margin", "lambda_used", "worst_xi", "c3", "c4"}``.
    """
    tag = classify(params)
    if tag.predicted_regime == "non_decaying":
        raise RegimeError("decay inequality undefined: case does not decay")
    _validate(params, config)
    xi = np.asarray(xi_grid, dtype=float)
    t = np.asarray(t_grid, dtype=float)
    if xi.ndim != 1 or xi.size == 0 or not np.all(np.isfinite(xi)):
        raise UsageError("xi_grid must be a nonempty finite 1-d grid")
    if t.ndim != 1 or t.size == 0 or np.any(t < 0.0) or not np.all(np.isfinite(t)):
        raise UsageError("t_grid must be a nonempty finite nonnegative 1-d grid")
    if n_states < 1:
        raise UsageError("n_states must be at least 1")

    half_w = 0.5 * energy_weights(params)
    f_vals = np.atleast_1d(decay_function(params, xi))

    def parts_worker(x):
        a = assemble_generator(params, x).entries
        corr = lyapunov_weight(params, x) * _correction_matrix(params, config, x)
        corr = 0.5 * (corr + corr.conj().T)
        m_corr = corr @ a + a.conj().T @ corr
        m_corr = 0.5 * (m_corr + m_corr.conj().T)
        m_energy = -0.5 * np.diag(dissipation_diagonal(params, x)).astype(complex)
        corr_lo, corr_hi = _pencil_range(corr, half_w)
        return m_energy, m_corr, corr_lo, corr_hi

    parts = parallel_map(parts_worker, xi, threads=threads)
    corr_lo = min(p[2] for p in parts)
    corr_hi = max(p[3] for p in parts)

    lam = config.lam
    rmax = None
    for _ in range(MAX_DOUBLINGS + 1):
        rmax = np.array(
            [_pencil_range(lam * me + mc, half_w)[1] for me, mc, _, _ in parts]
        )
        definite = np.all(rmax[f_vals > 0.0] < 0.0) and np.all(rmax[f_vals == 0.0] <= 0.0)
        if definite and lam + corr_lo > 0.0:
            break
        lam *= 2.0
    else:
        worst = float(xi[int(np.argmax(rmax))])
        raise VerificationError(
            f"decay inequality not certifiable after {MAX_DOUBLINGS} doublings "
            f"of the outer weight (worst frequency xi={worst:.6g}, "
            f"margin {float(np.max(rmax)):.3e})"
        )

    mask = f_vals > 0.0
    if np.any(mask):
        ratios = -rmax[mask] / f_vals[mask]
        c_fit = float(ratios.min()) * (1.0 - 1e-9)
        worst_xi = float(xi[mask][int(np.argmin(ratios))])
    else:
        c_fit = 0.0
        worst_xi = float(xi[0])

    # Deterministic draws regardless of worker scheduling: states are
    # produced up front in grid order.
    rng = np.random.default_rng(seed)
    dim = params.dim
    draws = []
    for _ in range(xi.size):
        s = rng.standard_normal((dim, n_states)) + 1j * rng.standard_normal((dim, n_states))
        draws.append(s / np.linalg.norm(s, axis=0, keepdims=True))

    def sample_worker(args):
        idx, x = args
        me, mc = parts[idx][0], parts[idx][1]
        m_total = lam * me + mc
        prop = Propagator(params, x)
        worst = -np.inf
        for tk in t:
            block = prop.matrix(tk) @ draws[idx]
            dl = np.real(np.einsum("ij,ik,kj->j", block.conj(), m_total, block))
            e = (np.abs(block) ** 2 * half_w[:, None]).sum(axis=0)
            worst = max(worst, float(np.max(dl + c_fit * f_vals[idx] * e)))
        return worst

    worst_margin = max(
        parallel_map(sample_worker, list(enumerate(xi)), threads=threads)
    )

    return {
        "c_fit": c_fit,
        "worst_margin": float(worst_margin),
        "lambda_used": lam,
        "worst_xi": worst_xi,
        "c3": float(lam + corr_lo),
        "c4": float(lam + corr_hi),
    }
