"""Eigenvalue-side diagnostics for the single-frequency generator.

Everything here runs on the dense matrix A(xi): full spectra, spectral
abscissa scans, the persistence check for the undamped pure imaginary
eigenvalue in the non-decaying transversal case, and a two-route
characteristic determinant comparison (dense LU against the closed-form
polynomial available in that same case).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, RegimeError, UsageError, VerificationError
from .model import ModelParams, assemble_generator, classify, decay_function
from .parallel import parallel_map


@dataclass(frozen=True)
class SpectrumSample:
    """Spectrum of A(xi) at one frequency.

    ``eigenvalues`` are sorted by real part, then imaginary part, so
    scans are reproducible.  ``eigvec_condition`` is the condition
    number of the eigenvector matrix; large values flag (numerically)
    defective frequencies where eigenvalue-based reasoning is fragile.
    """

    xi: float
    eigenvalues: np.ndarray
    abscissa: float
    eigvec_condition: float


def spectrum(params: ModelParams, xi: float) -> SpectrumSample:
    """Full spectrum of the generator at one frequency."""
    A = assemble_generator(params, xi).entries
    try:
        w, vecs = np.linalg.eig(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigen solver failed at xi={xi}: {exc}") from exc
    order = np.lexsort((w.imag, w.real))
    w = w[order]
    with np.errstate(divide="ignore", over="ignore"):
        cond = float(np.linalg.cond(vecs))
    return SpectrumSample(
        xi=float(xi),
        eigenvalues=w,
        abscissa=float(w.real.max()),
        eigvec_condition=cond,
    )


def abscissa_scan(params: ModelParams, xi_grid, threads=None) -> list:
    """Spectra along a frequency grid, in grid order.

    Parameters
    ----------
    params : ModelParams
    xi_grid : array_like of float
    threads : int, optional
        Worker threads; defaults to the THERMOLAM_THREADS environment
        variable, then the core count.

    Returns
    -------
    list of SpectrumSample
    """
    grid = np.asarray(xi_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or not np.all(np.isfinite(grid)):
        raise UsageError("xi_grid must be a nonempty 1-d array of finite floats")
    return parallel_map(lambda x: spectrum(params, x), grid, threads=threads)


def imaginary_eigen_check(params: ModelParams, xi: float, tol: float = 1e-10) -> dict:
    """Probe for the undamped pure imaginary eigenvalue.

    In the transversal placement with matching k2 and k3 the generator
    keeps an eigenvalue on the imaginary axis at every frequency:
    ``i*sqrt(k2)*xi`` away from frequency zero and ``i*sqrt(2*k1)`` at
    it.  This reports the smallest singular value of ``lam*I - A`` at
    that candidate, which is the distance to the nearest singular
    matrix, together with ``found = residual < tol``.

    Only meaningful for the transversal placement (any k2, k3: off the
    degenerate line the residual simply stays large).
    """
    if params.placement != "transversal":
        raise UsageError(
            "imaginary eigenvalue persistence is a transversal-placement "
            f"statement, got placement={params.placement!r}"
        )
    x = float(xi)
    if x != 0.0:
        lam = 1j * np.sqrt(params.k2) * x
    else:
        lam = 1j * np.sqrt(2.0 * params.k1)
    A = assemble_generator(params, x).entries
    shifted = lam * np.eye(params.dim) - A
    residual = float(np.linalg.svd(shifted, compute_uv=False)[-1])
    return {"found": residual < tol, "eigenvalue": complex(lam), "residual": residual}


def _closed_form_det(params: ModelParams, xi: float, lam: complex) -> complex:
    """Closed-form det(lam*I - A) for the non-decaying transversal case."""
    x = float(xi)
    k1, k2, k4 = params.k1, params.k2, params.k4
    g2 = params.gamma**2
    # For the zero-order coupling the only change is that the coupling
    # no longer carries a frequency factor, so g2*x**2 drops to g2.
    gx2 = g2 * x * x if params.coupling_order == "first_order" else g2
    P = lam**2 + k2 * x * x
    if params.law == "fourier":
        G = lam * (lam + k4 * x * x) + gx2
        return 2.0 * k1 * lam * P * G + P**2 * (lam * G + k1 * x * x * (lam + k4 * x * x))
    k5 = params.k5
    term1 = 2.0 * k1 * lam * (lam + k5) * P * (lam**2 + gx2)
    term2 = lam * (lam + k5) * P**2 * (lam**2 + k1 * x * x + gx2)
    bracket = (
        1j * k1 * k4 * x**3 * P
        + 1j * k4 * lam**2 * x * (lam + k1)
        + 1j * k2 * k4 * lam**2 * x**3
        + 1j * k1 * k4 * lam * x
    )
    term3 = -1j * k4 * x * P * bracket
    return term1 + term2 + term3


def characteristic_residual(params: ModelParams, xi: float, lam: complex) -> dict:
    """Two-route evaluation of the characteristic determinant.

    Computes ``det(lam*I - A)`` by dense LU factorization and, for the
    non-decaying transversal case where a closed-form polynomial
    exists, evaluates that polynomial as a cross-check.

    Returns
    -------
    dict with keys
        ``direct``      LU determinant (complex),
        ``closed_form`` polynomial value (complex),
        ``rel_gap``     relative gap between the two routes,
        ``scale``       ``norm(A, 2) ** dim``, the natural magnitude
                        against which raw determinant values should be
                        judged.

    Raises
    ------
    UsageError
        Outside the transversal, k2 == k3 case.  The LU route would
        still make sense there, but no closed form is available to
        compare against.
    """
    tag = classify(params)
    if params.placement != "transversal" or not tag.k2_eq_k3:
        raise UsageError(
            "closed-form characteristic polynomial only exists for the "
            "transversal placement with matching k2, k3"
        )
    A = assemble_generator(params, xi).entries
    shifted = complex(lam) * np.eye(params.dim) - A
    direct = complex(np.linalg.det(shifted))
    closed = _closed_form_det(params, xi, complex(lam))
    scale = float(np.linalg.norm(A, 2) ** params.dim)
    floor = max(scale, 1.0) * 1e-14
    rel_gap = abs(direct - closed) / max(abs(direct), abs(closed), floor)
    return {"direct": direct, "closed_form": closed, "rel_gap": rel_gap, "scale": scale}


def highfreq_abscissa_slope(
    params: ModelParams,
    xi_lo: float = 10.0,
    xi_hi: float = 100.0,
    n_points: int = 25,
    threads=None,
) -> dict:
    """Log-log slope of the decay rate -abscissa over a high band.

    Regularity-loss cases show the rate collapsing like a negative
    power of the frequency (slope -2 or -4 depending on the case);
    exponential cases give a flat fit with the rate bounded below.
    Returns ``{"slope": ..., "min_rate": ...}``.
    """
    tag = classify(params)
    if tag.predicted_regime == "non_decaying":
        raise RegimeError("abscissa slope undefined: case does not decay")
    if not (xi_lo >= 1.0 and xi_hi > xi_lo):
        raise UsageError("need 1 <= xi_lo < xi_hi")
    if n_points < 2:
        raise UsageError("need at least 2 grid points")
    grid = np.geomspace(xi_lo, xi_hi, n_points)
    samples = abscissa_scan(params, grid, threads=threads)
    rates = -np.array([s.abscissa for s in samples])
    if np.any(rates <= 0.0):
        bad = grid[rates <= 0.0][0]
        raise VerificationError(
            f"nonpositive decay rate at xi={bad:.6g} in a decaying case"
        )
    slope = float(np.polyfit(np.log(grid), np.log(rates), 1)[0])
    return {"slope": slope, "min_rate": float(rates.min())}


def nonstability_scan(params: ModelParams, xi_grid, tol: float = 1e-10, threads=None) -> list:
    """Run :func:`imaginary_eigen_check` along a grid, appending the
    spectral abscissa at each point.  Returns a list of dicts."""
    grid = np.asarray(xi_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or not np.all(np.isfinite(grid)):
        raise UsageError("xi_grid must be a nonempty 1-d array of finite floats")

    def worker(x):
        report = imaginary_eigen_check(params, x, tol=tol)
        report["xi"] = float(x)
        report["abscissa"] = spectrum(params, x).abscissa
        return report

    return parallel_map(worker, grid, threads=threads)
