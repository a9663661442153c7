"""Single-frequency model of a thermally damped laminated beam.

After a Fourier transform in space, the evolution problem reduces,
frequency by frequency, to a linear ODE system ``dU/dt = A(xi) U`` for
the complex amplitude vector

    U = (v, u, z, y, phi, theta, eta[, q])

where ``v, z, phi`` are strain-type amplitudes of the three elastic
channels (bending, shear rotation, interfacial slip), ``u, y, theta``
the matching velocity amplitudes, ``eta`` the temperature and ``q`` the
heat flux.  The flux slot is present only when the flux carries its own
relaxation dynamics (``law="cattaneo"``); for instantaneous diffusion
(``law="fourier"``) the temperature closes the system on its own.

``k1, k2, k3`` are the squared wave speeds of the elastic channels,
``k4`` (and ``k5`` for the relaxed flux) the thermal coefficients, and
``gamma`` the thermoelastic coupling strength.  The temperature couples
to exactly one velocity, selected by ``placement``:

* ``"transversal"``: coupling acts on ``u``,
* ``"rotation"``:    coupling acts on ``y``,
* ``"slip"``:        coupling acts on ``theta``.

``coupling_order`` chooses whether the coupling enters through the
space derivative of the temperature (``"first_order"``, one factor of
``i*xi`` per coupling entry) or through the temperature itself
(``"zero_order"``).

Negative ``gamma`` is allowed, and for the relaxed flux negative ``k4``
as well: flipping these signs conjugates the coupling but leaves the
energy balance intact, so every stability statement survives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, RegimeError

# Component slots of the frequency-domain state vector.  The flux slot Q
# exists only for law="cattaneo".
V, U, Z, Y, PHI, THETA, ETA, Q = range(8)

COMPONENT_NAMES = ("v", "u", "z", "y", "phi", "theta", "eta", "q")

PLACEMENTS = ("transversal", "rotation", "slip")
LAWS = ("fourier", "cattaneo")
COUPLING_ORDERS = ("first_order", "zero_order")
REGIMES = ("non_decaying", "regularity_loss", "exponential")

# Which velocity slot the temperature is wired to, per placement.
_COUPLED_SLOT = {"transversal": U, "rotation": Y, "slip": THETA}


@dataclass(frozen=True)
class ModelParams:
    """Coefficients and structural switches of the single-frequency model.

    Parameters
    ----------
    k1, k2, k3 : float
        Positive squared wave speeds of the bending, shear and slip
        channels.
    k4 : float
        Thermal diffusion (fourier) or flux coupling (cattaneo)
        coefficient.  Must be positive for the fourier law; for the
        cattaneo law any nonzero value is accepted.
    k5 : float or None
        Flux relaxation coefficient, required (and positive) for the
        cattaneo law, must be left at ``None`` otherwise.
    gamma : float
        Nonzero thermoelastic coupling strength.  Either sign works.
    placement : {"transversal", "rotation", "slip"}
        Velocity slot the temperature couples to.
    law : {"fourier", "cattaneo"}
        Heat flux closure.
    coupling_order : {"first_order", "zero_order"}
        Whether the coupling carries a space derivative.
    eq_tol : float
        Relative tolerance used when deciding whether wave speeds
        coincide, see :func:`classify`.
    """

    k1: float = 1.0
    k2: float = 1.0
    k3: float = 1.0
    k4: float = 1.0
    k5: float | None = None
    gamma: float = 1.0
    placement: str = "transversal"
    law: str = "fourier"
    coupling_order: str = "first_order"
    eq_tol: float = 1e-10

    def __post_init__(self):
        if self.placement not in PLACEMENTS:
            raise ParameterError(f"unknown placement {self.placement!r}")
        if self.law not in LAWS:
            raise ParameterError(f"unknown law {self.law!r}")
        if self.coupling_order not in COUPLING_ORDERS:
            raise ParameterError(f"unknown coupling_order {self.coupling_order!r}")
        for name in ("k1", "k2", "k3"):
            val = getattr(self, name)
            if not np.isfinite(val) or val <= 0.0:
                raise ParameterError(f"{name} must be finite and positive, got {val}")
        if not np.isfinite(self.gamma) or self.gamma == 0.0:
            raise ParameterError(f"gamma must be finite and nonzero, got {self.gamma}")
        if self.law == "fourier":
            if not np.isfinite(self.k4) or self.k4 <= 0.0:
                raise ParameterError(
                    f"k4 must be finite and positive for law='fourier', got {self.k4}"
                )
            if self.k5 is not None:
                raise ParameterError("k5 is only meaningful for law='cattaneo'")
        else:
            if not np.isfinite(self.k4) or self.k4 == 0.0:
                raise ParameterError(
                    f"k4 must be finite and nonzero for law='cattaneo', got {self.k4}"
                )
            if self.k5 is None or not np.isfinite(self.k5) or self.k5 <= 0.0:
                raise ParameterError(
                    f"k5 must be finite and positive for law='cattaneo', got {self.k5}"
                )
        if not np.isfinite(self.eq_tol) or self.eq_tol <= 0.0:
            raise ParameterError(f"eq_tol must be finite and positive, got {self.eq_tol}")

    @property
    def dim(self) -> int:
        """State dimension: 7 for the fourier law, 8 for cattaneo."""
        return 8 if self.law == "cattaneo" else 7

    @property
    def components(self) -> tuple:
        """Names of the active state components, in slot order."""
        return COMPONENT_NAMES[: self.dim]

    @property
    def coupled_slot(self) -> int:
        """Index of the velocity slot the temperature couples to."""
        return _COUPLED_SLOT[self.placement]


@dataclass(frozen=True)
class CaseTag:
    """Structural classification of a parameter point.

    ``predicted_regime`` is one of ``"non_decaying"`` (no decay at all),
    ``"regularity_loss"`` (polynomial decay paid for with derivatives of
    the data) and ``"exponential"`` (uniform exponential decay away from
    frequency zero).
    """

    placement: str
    law: str
    coupling_order: str
    equal_speeds: bool
    k2_eq_k3: bool
    k2_k3_gap: float
    predicted_regime: str


@dataclass(frozen=True)
class GeneratorMatrix:
    """Dense generator A(xi) of the single-frequency evolution."""

    xi: float
    entries: np.ndarray


def classify(params: ModelParams) -> CaseTag:
    """Classify a parameter point into its predicted decay regime.

    Wave speed coincidences are decided relative to ``params.eq_tol``:
    ``k2 == k3`` means ``|k2 - k3| <= eq_tol * k2``, and equal speeds
    additionally require ``|k1 - k2| <= eq_tol * k1``.  The raw gap
    ``|k2 - k3|`` is recorded so downstream fits can report how close to
    the degenerate case a run was.
    """
    gap = abs(params.k2 - params.k3)
    k2_eq_k3 = gap <= params.eq_tol * abs(params.k2)
    equal_speeds = k2_eq_k3 and abs(params.k1 - params.k2) <= params.eq_tol * abs(params.k1)
    if params.placement == "transversal":
        regime = "non_decaying" if k2_eq_k3 else "regularity_loss"
    elif equal_speeds and params.coupling_order == "first_order":
        regime = "exponential"
    else:
        regime = "regularity_loss"
    return CaseTag(
        placement=params.placement,
        law=params.law,
        coupling_order=params.coupling_order,
        equal_speeds=equal_speeds,
        k2_eq_k3=k2_eq_k3,
        k2_k3_gap=gap,
        predicted_regime=regime,
    )


def assemble_generator(params: ModelParams, xi: float) -> GeneratorMatrix:
    """Assemble the dense generator A(xi).

    Parameters
    ----------
    params : ModelParams
    xi : float
        Real frequency.  ``A(-xi)`` is the entrywise complex conjugate
        of ``A(xi)``, so real-space solutions built from these blocks
        stay real.

    Returns
    -------
    GeneratorMatrix
        Complex ``(dim, dim)`` matrix wrapped with its frequency.
    """
    x = float(xi)
    n = params.dim
    A = np.zeros((n, n), dtype=complex)

    A[V, U] = 1j * x
    A[V, Y] = 1.0
    A[V, THETA] = 1.0
    A[U, V] = 1j * params.k1 * x
    A[Z, Y] = 1j * x
    A[Y, Z] = 1j * params.k2 * x
    A[Y, V] = -params.k1
    A[PHI, THETA] = 1j * x
    A[THETA, PHI] = 1j * params.k3 * x
    A[THETA, V] = -params.k1

    slot = params.coupled_slot
    if params.coupling_order == "first_order":
        A[slot, ETA] = -1j * params.gamma * x
        A[ETA, slot] = -1j * params.gamma * x
    else:
        A[slot, ETA] = -params.gamma
        A[ETA, slot] = params.gamma

    if params.law == "fourier":
        A[ETA, ETA] = -params.k4 * x * x
    else:
        A[ETA, Q] = -1j * params.k4 * x
        A[Q, ETA] = -1j * params.k4 * x
        A[Q, Q] = -params.k5
    return GeneratorMatrix(xi=x, entries=A)


def energy_weights(params: ModelParams) -> np.ndarray:
    """Diagonal weights W of the frequency-wise energy E = 0.5 U^H W U."""
    w = np.ones(params.dim)
    w[V] = params.k1
    w[Z] = params.k2
    w[PHI] = params.k3
    return w


def dissipation_diagonal(params: ModelParams, xi: float) -> np.ndarray:
    """Diagonal of D(xi) in the exact balance W A + A^H W = -D(xi).

    Only the thermal slot dissipates: ``2 k4 xi^2`` on the temperature
    for the fourier law, ``2 k5`` on the flux for cattaneo.
    """
    d = np.zeros(params.dim)
    if params.law == "fourier":
        d[ETA] = 2.0 * params.k4 * xi * xi
    else:
        d[Q] = 2.0 * params.k5
    return d


def decay_function(params: ModelParams, xi):
    """Frequency profile f(xi) of the certified decay rate.

    The pointwise bound on the solution operator has the shape
    ``exp(-c * f(xi) * t)`` with f a fixed rational function of the
    frequency.  f is even, nonnegative, vanishes only at ``xi = 0`` and
    its large-frequency behaviour encodes the regime: it levels off for
    exponential cases and falls off like a negative power when decay
    costs regularity.

    Accepts scalars or arrays.  Raises :class:`RegimeError` for the
    transversal placement with ``k2 == k3``, where no decay happens and
    no profile is defined.
    """
    tag = classify(params)
    if tag.predicted_regime == "non_decaying":
        raise RegimeError(
            "no decay profile: transversal coupling with matching k2, k3 "
            f"(gap {tag.k2_k3_gap:.3e}) does not decay"
        )
    x2 = np.square(np.asarray(xi, dtype=float))
    if params.coupling_order == "first_order":
        if params.placement == "transversal":
            num = x2**3
            den = 1.0 + x2 + x2**2 + x2**3 + x2**4
        elif tag.equal_speeds:
            num = x2**2
            den = 1.0 + x2 + x2**2
        else:
            num = x2**2
            den = 1.0 + x2 + x2**2 + x2**3 + x2**4
    else:
        if params.placement == "transversal":
            num = x2**4
            den = 1.0 + x2 + x2**2 + x2**3 + x2**4 + x2**5
        elif tag.equal_speeds:
            num = x2**3
            den = 1.0 + x2 + x2**2 + x2**3
        else:
            num = x2**3
            den = 1.0 + x2 + x2**2 + x2**3 + x2**4 + x2**5
    out = num / den
    if np.ndim(xi) == 0:
        return float(out)
    return out
