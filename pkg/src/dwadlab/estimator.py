"""Density-weighted average derivative estimator and its variance estimators.

The estimator is the second-order U-statistic

    theta_hat = C(n,2)^{-1} sum_{i<j} U_ij,
    U_ij = -h^{-d-1} Kdot((X_i - X_j)/h) (Y_i - Y_j),

and the two studentizers are the asymptotically-linear plug-in
``V_AL = Sigma_hat / n`` and the small-bandwidth debiased
``V_SB = V_AL - C(n,2)^{-1} h^{-d-2} Delta_hat``.
"""

import dataclasses
import math

import numpy as np
from scipy.special import ndtri

from . import _pairs
from .errors import ConfigurationError, DataError, DegenerateVarianceError

AL = "AL"
SB = "SB"
VARIANCE_KINDS = (AL, SB)


@dataclasses.dataclass(frozen=True, eq=False)
class Sample:
    """n observations (Y_i, X_i) with X_i in R^d."""

    y: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        y = np.ascontiguousarray(self.y, dtype=float)
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        x = np.ascontiguousarray(x)
        if y.ndim != 1 or x.ndim != 2 or x.shape[0] != y.shape[0]:
            raise DataError(f"y must be length n and x n x d; got {y.shape} and {x.shape}")
        if y.shape[0] < 3:
            raise DataError(f"need at least 3 observations, got {y.shape[0]}")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(x))):
            raise DataError("sample contains non-finite values")
        y.setflags(write=False)
        x.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)

    @property
    def n(self):
        return self.y.shape[0]

    @property
    def dim(self):
        return self.x.shape[1]


@dataclasses.dataclass(frozen=True, eq=False)
class DwadFit:
    theta_hat: np.ndarray
    n: int
    h: float
    u_row_means: np.ndarray
    sigma_hat: np.ndarray
    delta_hat: np.ndarray
    v_al: np.ndarray
    v_sb: np.ndarray

    @property
    def dim(self):
        return self.theta_hat.shape[0]

    @property
    def quadratic_scale(self):
        """C(n,2)^{-1} h^{-d-2}, the factor multiplying Delta_hat in V_SB."""
        return 1.0 / (math.comb(self.n, 2) * self.h ** (self.dim + 2))

    def variance(self, kind):
        if kind == AL:
            return self.v_al
        if kind == SB:
            return self.v_sb
        raise ConfigurationError(f"variance kind must be one of {VARIANCE_KINDS}, got {kind!r}")


@dataclasses.dataclass(frozen=True)
class IntervalEstimate:
    direction: np.ndarray
    center: float
    half_width: float
    alpha: float
    variance_kind: str

    @property
    def lower(self):
        return self.center - self.half_width

    @property
    def upper(self):
        return self.center + self.half_width

    def covers(self, value):
        return self.lower <= value <= self.upper


def _check_bandwidth(h):
    if not (np.isfinite(h) and h > 0):
        raise ConfigurationError(f"bandwidth must be a positive finite number, got {h!r}")


def estimate(sample, kernel, h):
    """Fit the estimator on ``sample`` with ``kernel`` at bandwidth ``h``."""
    _check_bandwidth(h)
    if kernel.dim != sample.dim:
        raise ConfigurationError(
            f"kernel dimension {kernel.dim} does not match data dimension {sample.dim}"
        )
    coef = np.asarray(kernel.coef, dtype=float)
    row_sums, outer = _pairs.pair_aggregates(sample.y, sample.x, float(h), coef)
    return _assemble(row_sums, outer, sample.n, float(h))


def _assemble(row_sums, outer, n, h):
    d = row_sums.shape[1]
    npairs = math.comb(n, 2)
    row_means = row_sums / (n - 1)
    theta = np.array([math.fsum(row_means[:, l]) for l in range(d)]) / n
    L = 2.0 * (row_means - theta)
    sigma = L.T @ L / n
    sigma = 0.5 * (sigma + sigma.T)
    delta = outer * (h ** (d + 2) / npairs)
    v_al = sigma / n
    v_sb = v_al - delta / (npairs * h ** (d + 2))
    for arr in (theta, row_means, sigma, delta, v_al, v_sb):
        arr.setflags(write=False)
    return DwadFit(theta, n, h, row_means, sigma, delta, v_al, v_sb)


def variance_al(fit):
    """V_AL = Sigma_hat / n."""
    return fit.v_al


def variance_sb(fit, tol=0.0):
    """V_SB and whether it is positive semi-definite (eigenvalues >= -tol)."""
    lam = np.linalg.eigvalsh(fit.v_sb)
    return fit.v_sb, bool(lam[0] >= -tol)


def _direction(v, d):
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.shape != (d,):
        raise ConfigurationError(f"direction must have length {d}, got shape {v.shape}")
    if not np.all(np.isfinite(v)) or not np.any(v):
        raise ConfigurationError("direction must be finite and nonzero")
    return v


def studentizer(fit, v, kind):
    """v'Vv for the chosen variance kind, raising if it is not positive."""
    v = _direction(v, fit.dim)
    q = float(v @ fit.variance(kind) @ v)
    if not q > 0:
        raise DegenerateVarianceError(q, kind)
    return q


def t_statistic(fit, v, theta0_v, variance_kind=SB):
    """(v'theta_hat - theta0_v) / sqrt(v'Vv)."""
    v = _direction(v, fit.dim)
    q = studentizer(fit, v, variance_kind)
    return (float(v @ fit.theta_hat) - theta0_v) / math.sqrt(q)


def normal_critical_value(alpha):
    """c_alpha = Phi^{-1}(1 - alpha/2)."""
    if not 0 < alpha < 1:
        raise ConfigurationError(f"alpha must lie in (0, 1), got {alpha!r}")
    return float(-ndtri(0.5 * alpha))


def confidence_interval(fit, v, alpha=0.05, variance_kind=SB):
    c = normal_critical_value(alpha)
    v = _direction(v, fit.dim)
    q = studentizer(fit, v, variance_kind)
    return IntervalEstimate(v, float(v @ fit.theta_hat), c * math.sqrt(q), alpha, variance_kind)
