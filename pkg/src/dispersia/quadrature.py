"""Deterministic quadrature and fitting utilities.

Semi-infinite integrals are computed with a tanh-sinh (double-exponential)
rule on (0, 1) after the substitution ``x = scale * t / (1 - t)``.  The rule
is refined by nested level halving, so identical inputs always visit the
identical node set and produce bit-identical results.  Helpers for
row-batched inner integrals (each row converged and frozen independently),
vector-valued integrands sharing one grid, central-difference gradients, and
log-log power-law fits live here as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "QuadratureConfig",
    "PowerLawFit",
    "NonConvergenceError",
    "integrate_semi_infinite",
    "fit_power_law",
    "gradient_fd",
]

# Base step and cutoff for the tanh-sinh abscissas u_k = m * h.  With
# |u| <= 3.1 the mapped nodes stay strictly inside (0, 1) in double
# precision (1 - t >= ~8e-16) while the discarded tail weight is far below
# double-precision resolution.
_H0 = 0.5
_U_MAX = 3.1

_TS_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


class NonConvergenceError(RuntimeError):
    """Raised when nested refinement exhausts its levels before converging.

    Attributes
    ----------
    best_estimate : float or ndarray
        The last (most refined) estimate of the integral.
    error_bound : float or ndarray
        The last observed inter-level difference, an estimate of the error.
    """

    def __init__(self, message: str, best_estimate, error_bound):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_bound = error_bound


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and refinement limits for the integration engine.

    Attributes
    ----------
    rel_tol : float
        Target relative error of a converged integral.
    abs_tol : float
        Absolute-error floor; integrals near zero converge on this.
    max_refinement_levels : int
        Maximum number of level halvings before giving up.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_refinement_levels: int = 12

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_refinement_levels < 4:
            raise ValueError("max_refinement_levels must be at least 4")


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares power law v = amplitude * a**exponent.

    Attributes
    ----------
    exponent : float
        Slope of the line through (ln a, ln |v|).
    amplitude : float
        Signed prefactor; carries the common sign of the samples.
    max_log_residual : float
        Largest absolute residual of the fit in log space.
    sample_points : tuple of (float, float)
        The (a, v) pairs that were fitted.
    """

    exponent: float
    amplitude: float
    max_log_residual: float
    sample_points: tuple = field(default_factory=tuple)


def _ts_level_nodes(level: int) -> tuple[np.ndarray, np.ndarray]:
    """Abscissas t and weights w that are new at the given refinement level.

    Level 0 holds all integer multiples of the base step; level k > 0 holds
    the odd multiples of h = _H0 / 2**k.  Weights include the tanh-sinh
    Jacobian but not the step h.
    """
    cached = _TS_CACHE.get(level)
    if cached is not None:
        return cached
    if level == 0:
        m_max = int(math.floor(_U_MAX / _H0))
        u = np.arange(-m_max, m_max + 1, dtype=float) * _H0
    else:
        h = _H0 / 2**level
        k_max = int(math.floor(_U_MAX / h))
        odd = np.arange(1, k_max + 1, 2, dtype=float)
        u = np.concatenate([-odd[::-1], odd]) * h
    s = np.sinh(u) * (math.pi / 2)
    t = 0.5 * (1.0 + np.tanh(s))
    w = (math.pi / 4) * np.cosh(u) / np.cosh(s) ** 2
    _TS_CACHE[level] = (t, w)
    return t, w


def _eval_batch(f: Callable, x: np.ndarray) -> np.ndarray:
    """Evaluate an integrand on an array of abscissas.

    Vectorized callables are used directly; scalar-only callables fall back
    to an elementwise loop so the public API accepts plain ``float -> float``
    functions.
    """
    try:
        out = np.asarray(f(x), dtype=float)
        if out.shape == x.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(f(v)) for v in x], dtype=float)


def integrate_semi_infinite(
    f: Callable,
    config: QuadratureConfig | None = None,
    *,
    scale: float = 1.0,
    full_output: bool = False,
):
    """Integrate ``f`` over (0, infinity) deterministically.

    Parameters
    ----------
    f : callable
        Integrand; may be scalar ``float -> float`` or vectorized over
        ndarrays.  Must be continuous on (0, inf), integrable at 0, and
        decay at least like x**-2 at infinity.
    config : QuadratureConfig, optional
        Tolerances; defaults are rel_tol 1e-10, abs_tol 1e-14.
    scale : float
        Characteristic abscissa of the integrand (inverse of its dominant
        decay rate); the substitution x = scale * t / (1 - t) puts the bulk
        of the integrand mid-interval.
    full_output : bool
        When true, return ``(value, error_estimate)``.

    Returns
    -------
    float or (float, float)

    Raises
    ------
    NonConvergenceError
        If refinement levels are exhausted; the error carries the best
        estimate and its error bound.
    """
    if config is None:
        config = QuadratureConfig()
    if not (scale > 0 and math.isfinite(scale)):
        raise ValueError("scale must be positive and finite")
    running = 0.0
    prev = None
    for level in range(config.max_refinement_levels + 1):
        t, w = _ts_level_nodes(level)
        x = scale * (t / (1.0 - t))
        vals = _eval_batch(f, x)
        running += float(np.sum(vals * (w * (scale / (1.0 - t) ** 2))))
        h = _H0 / 2**level
        estimate = h * running
        if prev is not None:
            err = abs(estimate - prev)
            if err <= max(config.rel_tol * abs(estimate), config.abs_tol):
                if full_output:
                    return estimate, err
                return estimate
        prev = estimate
    raise NonConvergenceError(
        "semi-infinite integral did not converge within "
        f"{config.max_refinement_levels} refinement levels",
        best_estimate=prev,
        error_bound=err,
    )


def integrate_semi_infinite_vector(
    f: Callable[[np.ndarray], np.ndarray],
    n_components: int,
    config: QuadratureConfig | None = None,
    *,
    scale: float = 1.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Integrate a vector-valued integrand on one shared grid.

    ``f`` maps an abscissa array of shape (n,) to values of shape
    (n, n_components).  All components are refined together until every one
    meets the tolerance, so linear relations between components (for example
    a sum decomposition) hold exactly on the common grid.

    Returns ``(values, error_estimates)``, each of shape (n_components,).
    """
    if config is None:
        config = QuadratureConfig()
    if not (scale > 0 and math.isfinite(scale)):
        raise ValueError("scale must be positive and finite")
    running = np.zeros(n_components)
    prev = None
    for level in range(config.max_refinement_levels + 1):
        t, w = _ts_level_nodes(level)
        x = scale * (t / (1.0 - t))
        vals = np.asarray(f(x), dtype=float)
        if vals.shape != (x.size, n_components):
            raise ValueError("vector integrand returned wrong shape")
        running += (w * (scale / (1.0 - t) ** 2)) @ vals
        h = _H0 / 2**level
        estimate = h * running
        if prev is not None:
            err = np.abs(estimate - prev)
            tol = np.maximum(config.rel_tol * np.abs(estimate), config.abs_tol)
            if np.all(err <= tol):
                return estimate, err
        prev = estimate.copy()
    raise NonConvergenceError(
        "vector semi-infinite integral did not converge within "
        f"{config.max_refinement_levels} refinement levels",
        best_estimate=prev,
        error_bound=err,
    )


def integrate_semi_infinite_rows(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    scales: Sequence[float],
    config: QuadratureConfig | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Batch of independent semi-infinite integrals, one per row.

    ``f(x, rows)`` receives abscissas of shape (m_active, n) and the array
    of active row indices, and returns integrand values of the same shape.
    Each row uses its own substitution scale and is frozen at its own
    convergence level, so a row's value is a pure function of that row's
    integrand and scale — independent of how rows are batched.

    Returns ``(values, error_estimates)``, each of shape (len(scales),).
    """
    if config is None:
        config = QuadratureConfig()
    scales = np.asarray(scales, dtype=float)
    if scales.ndim != 1 or not np.all((scales > 0) & np.isfinite(scales)):
        raise ValueError("scales must be a 1-D array of positive finite values")
    m = scales.size
    running = np.zeros(m)
    prev = np.full(m, np.nan)
    have_prev = False
    result = np.zeros(m)
    err_out = np.full(m, np.inf)
    active = np.arange(m)
    for level in range(config.max_refinement_levels + 1):
        t, w = _ts_level_nodes(level)
        sc = scales[active, None]
        x = sc * (t / (1.0 - t))[None, :]
        vals = np.asarray(f(x, active), dtype=float)
        if vals.shape != x.shape:
            raise ValueError("row integrand returned wrong shape")
        running[active] += np.sum(
            vals * (w[None, :] * (sc / (1.0 - t)[None, :] ** 2)), axis=1
        )
        h = _H0 / 2**level
        estimate = h * running[active]
        if have_prev:
            err = np.abs(estimate - prev[active])
            tol = np.maximum(config.rel_tol * np.abs(estimate), config.abs_tol)
            done = err <= tol
            idx = active[done]
            result[idx] = estimate[done]
            err_out[idx] = err[done]
            prev[active] = estimate
            active = active[~done]
            if active.size == 0:
                return result, err_out
        else:
            prev[active] = estimate
            have_prev = True
    result[active] = prev[active]
    raise NonConvergenceError(
        f"{active.size} of {m} row integrals did not converge within "
        f"{config.max_refinement_levels} refinement levels",
        best_estimate=result,
        error_bound=err_out,
    )


def fit_power_law(samples: Sequence[tuple[float, float]]) -> PowerLawFit:
    """Fit v = A * a**p through samples by least squares in log-log space.

    Parameters
    ----------
    samples : sequence of (a, v)
        At least three pairs with distinct positive a and nonzero v of one
        common sign.

    Returns
    -------
    PowerLawFit

    Raises
    ------
    ValueError
        On too few samples, repeated or nonpositive a, or mixed-sign/zero v.
    """
    pts = [(float(a), float(v)) for a, v in samples]
    if len(pts) < 3:
        raise ValueError("need at least 3 samples for a power-law fit")
    a = np.array([p[0] for p in pts])
    v = np.array([p[1] for p in pts])
    if np.any(a <= 0) or not np.all(np.isfinite(a)):
        raise ValueError("sample abscissas must be positive and finite")
    if np.unique(a).size != a.size:
        raise ValueError("sample abscissas must be distinct")
    if np.any(v == 0) or not np.all(np.isfinite(v)):
        raise ValueError("sample values must be nonzero and finite")
    sign = np.sign(v[0])
    if not np.all(np.sign(v) == sign):
        raise ValueError("sample values must share one sign")
    log_a = np.log(a)
    log_v = np.log(np.abs(v))
    slope, intercept = np.polyfit(log_a, log_v, 1)
    residuals = log_v - (slope * log_a + intercept)
    return PowerLawFit(
        exponent=float(slope),
        amplitude=float(sign * math.exp(intercept)),
        max_log_residual=float(np.max(np.abs(residuals))),
        sample_points=tuple(pts),
    )


def gradient_fd(
    f: Callable[[np.ndarray], float], r: Sequence[float], step: float
) -> np.ndarray:
    """Central-difference gradient of a scalar field at a point.

    Parameters
    ----------
    f : callable
        Scalar function of a 3-vector.
    r : array-like, shape (3,)
        Evaluation point.
    step : float
        Finite-difference step; truncation error is O(step**2).

    Returns
    -------
    ndarray, shape (3,)
    """
    if not (step > 0 and math.isfinite(step)):
        raise ValueError("step must be positive and finite")
    r = np.asarray(r, dtype=float)
    if r.shape != (3,):
        raise ValueError("r must be a 3-vector")
    grad = np.zeros(3)
    for i in range(3):
        e = np.zeros(3)
        e[i] = step
        grad[i] = (f(r + e) - f(r - e)) / (2.0 * step)
    return grad
