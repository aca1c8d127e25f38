# sim/dip_fit.py
"""
Gaussian dip fitting, C(x) = B - A exp(-((x - x0) / w)^2).

The fit runs on x normalized to [-1/2, 1/2] and counts scaled to unit peak, with
an analytic Jacobian and a bounded trust-region Gauss-Newton solver, followed by
a few projected Gauss-Newton steps that drive the scaled gradient to GRADIENT_TOLERANCE.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import least_squares

from homlink.core.errors import DegenerateDataError, InvalidParameterError
from homlink.sim._base import C_LIGHT, require_finite, require_positive
from homlink.utils.debug_logger import get_logger

log = get_logger("dip_fit")

MIN_POINTS = 5
MAX_EVALUATIONS = 200
SOLVER_TOLERANCE = 1e-15
GRADIENT_TOLERANCE = 1e-10
POLISH_STEPS = 8
FWHM_PER_WIDTH = 2.0 * math.sqrt(math.log(2.0))
_MIN_NORMALIZED_WIDTH = 1e-9


@dataclass(frozen=True)
class DipFit:
    baseline: float
    depth: float
    center: float
    width: float
    residual_norm: float
    converged: bool
    covariance_diag: tuple[float, float, float, float]
    evaluations: int = 0
    message: str = ""

    @property
    def fwhm(self) -> float:
        return FWHM_PER_WIDTH * self.width

    @property
    def params(self) -> np.ndarray:
        return np.array([self.baseline, self.depth, self.center, self.width])

    @classmethod
    def unconverged(cls, message: str) -> "DipFit":
        """Placeholder result for data the fit cannot use."""
        nan = float("nan")
        return cls(nan, nan, nan, nan, nan, False, (nan, nan, nan, nan), 0, message)


def dip_model(params, x) -> np.ndarray:
    baseline, depth, center, width = params
    u = (np.asarray(x, dtype=float) - center) / width
    return baseline - depth * np.exp(-u * u)


def dip_jacobian(params, x) -> np.ndarray:
    """Columns d/dB, d/dA, d/dx0, d/dw of the model."""
    _, depth, center, width = params
    u = (np.asarray(x, dtype=float) - center) / width
    g = np.exp(-u * u)
    jac = np.empty((u.size, 4))
    jac[:, 0] = 1.0
    jac[:, 1] = -g
    jac[:, 2] = -depth * g * 2.0 * u / width
    jac[:, 3] = -depth * g * 2.0 * u * u / width
    return jac


def _as_arrays(points: Iterable[Sequence[float]]) -> tuple[np.ndarray, np.ndarray]:
    data = np.asarray(list(points), dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise InvalidParameterError("points must be (delta_l, counts) pairs")
    if not np.all(np.isfinite(data)):
        raise InvalidParameterError("points must be finite")
    return data[:, 0], data[:, 1]


def _check_fit_data(x: np.ndarray, y: np.ndarray):
    if x.size < MIN_POINTS:
        raise DegenerateDataError(f"dip fit needs at least {MIN_POINTS} points, got {x.size}")
    if np.all(x == x[0]):
        raise DegenerateDataError("all delta_l values are equal")
    if np.all(y == 0.0):
        raise DegenerateDataError("all counts are zero")


def _resolve_weights(y: np.ndarray, weights) -> np.ndarray:
    if weights is None or (isinstance(weights, str) and weights == "poisson"):
        return 1.0 / np.maximum(y, 1.0)
    if isinstance(weights, str):
        if weights == "none":
            return np.ones_like(y)
        raise InvalidParameterError(f"unknown weighting {weights!r}")
    weights = np.asarray(weights, dtype=float)
    if weights.shape != y.shape or np.any(weights < 0.0) or not np.all(np.isfinite(weights)):
        raise InvalidParameterError("weights must be finite, non-negative and match the points")
    return weights


def initial_guess(x, y) -> np.ndarray:
    """
    (B, A, x0, w) seed.

    B is the mean of the outer fifth of the points in x order, A = B - min,
    x0 sits at the minimum and w is half the x-span of the points below
    B - A/2 (one grid step when fewer than two qualify).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    per_side = max(1, int(round(0.1 * xs.size)))
    baseline = float(np.mean(np.concatenate([ys[:per_side], ys[-per_side:]])))
    lowest = int(np.argmin(ys))
    depth = max(baseline - float(ys[lowest]), 0.0)
    center = float(xs[lowest])

    below = xs[ys < baseline - depth / 2.0]
    width = 0.5 * float(below.max() - below.min()) if below.size >= 2 else 0.0
    if width <= 0.0:
        steps = np.diff(np.unique(xs))
        width = float(steps.min())
    return np.array([max(baseline, 0.0), depth, center, width])


def weighted_residual_norm(params, x, y, weights=None) -> float:
    y = np.asarray(y, dtype=float)
    w = _resolve_weights(y, weights)
    return float(np.sqrt(np.sum(w * (dip_model(params, x) - y) ** 2)))


def _fraction_jacobian(p, x) -> np.ndarray:
    """Jacobian in (B, A/B, x0, w), the solver's parameters."""
    baseline, fraction, center, width = p
    jac = dip_jacobian((baseline, fraction * baseline, center, width), x)
    jac[:, 0] += fraction * jac[:, 1]
    jac[:, 1] *= baseline
    return jac


def _scaled_gradient(p, grad, lower, upper) -> float:
    """Inf-norm of the gradient, each component scaled by its distance to the bound it points at."""
    reach = np.where(grad > 0.0, p - lower, upper - p)
    reach = np.where(np.isfinite(reach), reach, 1.0)
    return float(np.max(np.abs(grad * reach)))


def _polish(p, residuals, jacobian, lower, upper, budget: int):
    """Projected Gauss-Newton steps until the scaled gradient meets GRADIENT_TOLERANCE."""
    evaluations = 0
    while True:
        r = residuals(p)
        jac = jacobian(p)
        evaluations += 1
        grad = jac.T @ r
        optimality = _scaled_gradient(p, grad, lower, upper)
        if optimality <= GRADIENT_TOLERANCE or evaluations > budget:
            return p, optimality, evaluations
        free = ~(((p <= lower) & (grad > 0.0)) | ((p >= upper) & (grad < 0.0)))
        step = np.zeros_like(p)
        step[free] = np.linalg.lstsq(jac[:, free], -r, rcond=None)[0]
        p = np.clip(p + step, lower, upper)


def fit_gaussian_dip(points: Iterable[Sequence[float]], weights=None) -> DipFit:
    """
    Weighted least-squares fit of the Gaussian dip to (delta_l, counts) points.

    ``weights`` is None or "poisson" for 1/max(counts, 1), "none" for an
    unweighted fit, or an explicit array. The depth is solved for as a fraction
    of the baseline in [0, 1], so 0 <= A <= B always holds. ``converged`` is set
    only when the solver stopped on a tolerance within its evaluation budget and
    the bound-scaled gradient of the normalized problem is at most
    GRADIENT_TOLERANCE.
    """
    x, y = _as_arrays(points)
    _check_fit_data(x, y)
    w = _resolve_weights(y, weights)

    mid = 0.5 * (x.max() + x.min())
    span = x.max() - x.min()
    scale = float(np.max(np.abs(y)))
    xn = (x - mid) / span
    yn = y / scale
    sqrt_w = np.sqrt(w / w.max())

    guess = initial_guess(x, y)
    fraction = min(guess[1] / guess[0], 1.0) if guess[0] > 0.0 else 0.0
    start = np.array([guess[0] / scale, fraction, (guess[2] - mid) / span, guess[3] / span])
    start[3] = max(start[3], 2.0 * _MIN_NORMALIZED_WIDTH)
    lower = np.array([0.0, 0.0, -np.inf, _MIN_NORMALIZED_WIDTH])
    upper = np.array([np.inf, 1.0, np.inf, np.inf])

    def residuals(p):
        baseline, fraction, center, width = p
        return sqrt_w * (dip_model((baseline, fraction * baseline, center, width), xn) - yn)

    def jacobian(p):
        return sqrt_w[:, None] * _fraction_jacobian(p, xn)

    result = least_squares(
        residuals,
        start,
        jac=jacobian,
        bounds=(lower, upper),
        method="trf",
        xtol=SOLVER_TOLERANCE,
        ftol=SOLVER_TOLERANCE,
        gtol=SOLVER_TOLERANCE,
        max_nfev=MAX_EVALUATIONS,
    )
    pn = result.x
    evaluations = int(result.nfev)
    optimality = float(result.optimality)
    if result.status > 0:
        budget = min(POLISH_STEPS, MAX_EVALUATIONS - evaluations)
        polished, polished_optimality, extra = _polish(pn, residuals, jacobian, lower, upper, budget)
        evaluations += extra
        polished_cost = 0.5 * float(np.sum(residuals(polished) ** 2))
        if polished_optimality <= GRADIENT_TOLERANCE and polished_cost <= result.cost * (1.0 + 1e-9) + 1e-24:
            pn, optimality = polished, polished_optimality
    params = np.array([pn[0] * scale, pn[1] * pn[0] * scale, mid + pn[2] * span, pn[3] * span])

    jac = np.sqrt(w)[:, None] * dip_jacobian(params, x)
    chi2 = float(np.sum(w * (dip_model(params, x) - y) ** 2))
    dof = max(x.size - 4, 1)
    covariance = np.linalg.pinv(jac.T @ jac) * (chi2 / dof)

    converged = bool(result.status > 0 and optimality <= GRADIENT_TOLERANCE)
    message = str(result.message)
    if result.status > 0 and not converged:
        message = f"scaled gradient {optimality:.3g} above {GRADIENT_TOLERANCE:g} ({message})"
    fit = DipFit(
        baseline=float(params[0]),
        depth=float(params[1]),
        center=float(params[2]),
        width=float(params[3]),
        residual_norm=math.sqrt(chi2),
        converged=converged,
        covariance_diag=tuple(float(v) for v in np.diag(covariance)),
        evaluations=evaluations,
        message=message,
    )
    if fit.converged:
        log.info(
            f"dip fit converged after {fit.evaluations} evaluations: B={fit.baseline:.6g} "
            f"A={fit.depth:.6g} x0={fit.center:.6g} w={fit.width:.6g}"
        )
    else:
        log.warning(f"dip fit did not converge: {fit.message}")
    return fit


def dip_width_prediction(coherence_time: float, n_eff: float) -> float:
    """sqrt(2) tau_c c / n_eff, the FWHM in stretch expected from two convolved wave packets."""
    require_positive("coherence_time", coherence_time)
    if require_finite("n_eff", n_eff) < 1.0:
        raise InvalidParameterError("n_eff must be >= 1")
    return math.sqrt(2.0) * coherence_time * C_LIGHT / n_eff


def oracle_dip_fwhm(delta: float, n_eff: float) -> float:
    """FWHM in stretch of the envelope exp(-tau^2 / delta^2)."""
    require_positive("delta", delta)
    if require_finite("n_eff", n_eff) < 1.0:
        raise InvalidParameterError("n_eff must be >= 1")
    return FWHM_PER_WIDTH * delta * C_LIGHT / n_eff


def visibilities_from_fit(fit: DipFit, accidental_level: float) -> tuple[float, float]:
    """(A / B, A / (B - accidentals))."""
    accidental_level = require_finite("accidental_level", accidental_level)
    if not math.isfinite(fit.baseline) or fit.baseline <= 0.0:
        raise DegenerateDataError("fitted baseline is not positive")
    if accidental_level >= fit.baseline:
        raise DegenerateDataError(
            f"accidental level {accidental_level:.6g} is not below the fitted baseline {fit.baseline:.6g}"
        )
    return fit.depth / fit.baseline, fit.depth / (fit.baseline - accidental_level)
