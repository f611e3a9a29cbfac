"""Edgeworth approximations for standardized and studentized DWAD statistics.

Three DWAD-specific expansions are provided (standardized, studentized with
the asymptotically-linear variance, studentized with the small-bandwidth
variance), together with the generic second-order U-statistic expansion in
Hermite form and the implied two-sided coverage probabilities.
"""

import dataclasses
import math

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import ConfigurationError

STANDARDIZED = "standardized"
STUDENTIZED_AL = "studentized_al"
STUDENTIZED_SB = "studentized_sb"
SCHEMES = (STANDARDIZED, STUDENTIZED_AL, STUDENTIZED_SB)

#: gamma_1 multiplies (it) inside the bracket of the characteristic function
BRACKET = "bracket"
#: gamma_1 enters through exp(i t gamma_1), a location shift
SHIFT = "shift"

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def norm_pdf(x):
    x = np.asarray(x, dtype=float)
    return _INV_SQRT_2PI * np.exp(-0.5 * x * x)


def norm_cdf(x):
    return ndtr(np.asarray(x, dtype=float))


def norm_quantile(p):
    return ndtri(np.asarray(p, dtype=float))


def critical_value(alpha):
    if not 0 < alpha < 1:
        raise ConfigurationError(f"alpha must lie in (0, 1), got {alpha!r}")
    return float(-ndtri(0.5 * alpha))


def hermite(k, x):
    """Probabilists' Hermite polynomial He_k(x) by the three-term recurrence."""
    if k < 0 or int(k) != k:
        raise ConfigurationError(f"Hermite order must be a non-negative integer, got {k!r}")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if k == 0:
        return prev
    cur = x.copy()
    for j in range(1, int(k)):
        prev, cur = cur, x * cur - j * prev
    return cur


def rn(n, h, P, d):
    """Rate sqrt(n) h^P + 1/(n h^{d+2}) + 1/sqrt(n) of the expansion error."""
    if n < 2 or not h > 0:
        raise ConfigurationError(f"rn needs n >= 2 and h > 0, got n={n}, h={h}")
    return math.sqrt(n) * h ** P + 1.0 / (n * h ** (d + 2)) + 1.0 / math.sqrt(n)


@dataclasses.dataclass(frozen=True)
class DwadExpansionInputs:
    """Population constants entering the DWAD Edgeworth expansions.

    ``vartheta_ratio`` is omega_v^2 / vartheta_v^2 for the standardization in
    use; it only affects :func:`std_expansion` and the standardized coverage.
    """

    n: int
    h: float
    d: int
    P: int
    sigma_v: float
    delta_v2: float
    beta_v: float
    kappa1_v: float
    kappa2_v: float
    vartheta_ratio: float = 1.0

    def __post_init__(self):
        if not self.sigma_v > 0:
            raise ConfigurationError(f"sigma_v must be positive, got {self.sigma_v}")
        if self.delta_v2 < 0:
            raise ConfigurationError(f"delta_v2 must be non-negative, got {self.delta_v2}")
        if not self.vartheta_ratio > 0:
            raise ConfigurationError(f"vartheta_ratio must be positive, got {self.vartheta_ratio}")
        if not math.isfinite(self.rn):
            raise ConfigurationError("r_n is not finite for these inputs")

    @property
    def rn(self):
        return rn(self.n, self.h, self.P, self.d)

    @property
    def bias_term(self):
        return math.sqrt(self.n) * self.h ** self.P * self.beta_v / self.sigma_v

    @property
    def variance_term(self):
        """delta_v^2 / (n h^{d+2} sigma_v^2)."""
        return self.delta_v2 / (self.n * self.h ** (self.d + 2) * self.sigma_v ** 2)

    @property
    def _skew_unit(self):
        return 6.0 * math.sqrt(self.n) * self.sigma_v ** 3

    @property
    def omega_v2(self):
        """Leading-term variance sigma_v^2/n + C(n,2)^{-1} h^{-d-2} delta_v^2."""
        return (self.sigma_v ** 2 / self.n
                + self.delta_v2 / (math.comb(self.n, 2) * self.h ** (self.d + 2)))

    def with_ratio(self, ratio):
        return dataclasses.replace(self, vartheta_ratio=ratio)


def std_expansion(inputs, x):
    """G(x) for the statistic standardized by a non-random vartheta_v."""
    x = np.asarray(x, dtype=float)
    skew = (inputs.kappa1_v + inputs.kappa2_v) / inputs._skew_unit
    bracket = (inputs.bias_term
               + 0.5 * (inputs.vartheta_ratio - 1.0) * x
               + skew * (x * x - 1.0))
    return norm_cdf(x) - norm_pdf(x) * bracket


def _studentized_location_and_skew(inputs):
    loc = inputs.bias_term - (3 * inputs.kappa1_v + 2 * inputs.kappa2_v) / inputs._skew_unit
    skew = (2 * inputs.kappa1_v + inputs.kappa2_v) / inputs._skew_unit
    return loc, skew


def studentized_al(inputs, x):
    """G_AL(x) for the t-statistic studentized by v'V_AL v."""
    x = np.asarray(x, dtype=float)
    loc, skew = _studentized_location_and_skew(inputs)
    bracket = loc - inputs.variance_term * x - skew * (x * x - 1.0)
    return norm_cdf(x) - norm_pdf(x) * bracket


def studentized_sb(inputs, x):
    """G_SB(x) for the t-statistic studentized by v'V_SB v."""
    x = np.asarray(x, dtype=float)
    loc, skew = _studentized_location_and_skew(inputs)
    bracket = loc - skew * (x * x - 1.0)
    return norm_cdf(x) - norm_pdf(x) * bracket


def coverage_prediction(inputs, alpha, scheme):
    """Two-sided coverage of theta_v +/- c_alpha * (scale) implied by the expansions."""
    c = critical_value(alpha)
    base = 1.0 - alpha
    if scheme == STANDARDIZED:
        return base - (inputs.vartheta_ratio - 1.0) * float(norm_pdf(c)) * c
    if scheme == STUDENTIZED_AL:
        return base + 2.0 * inputs.variance_term * float(norm_pdf(c)) * c
    if scheme == STUDENTIZED_SB:
        return base
    raise ConfigurationError(f"unknown coverage scheme {scheme!r}; expected one of {SCHEMES}")


# ---------------------------------------------------------------------------
# generic second-order U-statistics
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class GenericUstatInputs:
    """Hoeffding moments of a second-order U-statistic with n-varying kernel.

    ``kappa_a`` is E[l_1^3] and ``kappa_b`` is E[l_1 l_2 q_12].
    """

    n: int
    bias: float
    scale: float
    sigma_ell2: float
    sigma_q2: float
    kappa_a: float
    kappa_b: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ConfigurationError(f"scale (vartheta) must be positive, got {self.scale}")
        if self.n < 4:
            raise ConfigurationError(f"generic expansion needs n >= 4, got {self.n}")

    @property
    def omega2(self):
        return self.sigma_ell2 / self.n + self.sigma_q2 / math.comb(self.n, 2)


@dataclasses.dataclass(frozen=True)
class GammaCoefficients:
    gamma: tuple

    def __post_init__(self):
        g = tuple(float(v) for v in self.gamma)
        if len(g) != 9:
            raise ConfigurationError(f"expected 9 gamma coefficients, got {len(g)}")
        object.__setattr__(self, "gamma", g)

    def __getitem__(self, j):
        """1-based access: ``gammas[1]`` is gamma_1."""
        return self.gamma[j - 1]

    def as_array(self):
        return np.array(self.gamma)


def generic_gammas(inputs):
    """gamma_1, ..., gamma_9 of the generic U-statistic expansion."""
    n = inputs.n
    th = inputs.scale
    th2 = th * th
    w2 = inputs.omega2
    ka, kb = inputs.kappa_a, inputs.kappa_b
    inv_pairs = 1.0 / math.comb(n, 2)
    quad = inv_pairs ** 2 * math.comb(n, 4)
    lin_gap = inputs.sigma_ell2 / n - th2
    g = [
        inputs.bias / th,
        (w2 - th2) / (2 * th2),
        (ka + 6 * kb) / (6 * n ** 2 * th ** 3),
        (w2 - th2) / (4 * th ** 4) * inv_pairs * inputs.sigma_q2,
        (inv_pairs * ka * inputs.sigma_q2 + 6 * lin_gap * kb) / (12 * n ** 2 * th ** 5),
        (ka * kb + 12 * quad * kb ** 2) / (6 * n ** 4 * th ** 6),
        0.0,
        lin_gap / (4 * n ** 4 * th ** 8) * quad * kb ** 2,
        quad * ka * kb ** 2 / (12 * n ** 6 * th ** 9),
    ]
    return GammaCoefficients(tuple(g))


def _as_gamma_array(gammas):
    if isinstance(gammas, GammaCoefficients):
        return gammas.as_array()
    g = np.asarray(gammas, dtype=float)
    if g.shape != (9,):
        raise ConfigurationError(f"expected 9 gamma coefficients, got shape {g.shape}")
    return g


def generic_cdf(gammas, x, convention=BRACKET):
    """Closed-form inverse of the expansion's characteristic function.

    With the bracket convention this is Phi(x) - phi(x) sum_j gamma_j He_{j-1}(x).
    Under the shift convention gamma_1 shifts the location instead.
    """
    g = _as_gamma_array(gammas)
    x = np.asarray(x, dtype=float)
    if convention == BRACKET:
        z, start = x, 0
    elif convention == SHIFT:
        z, start = x - g[0], 1
    else:
        raise ConfigurationError(f"unknown convention {convention!r}")
    corr = np.zeros_like(z)
    for j in range(start, 9):
        if g[j] != 0.0:
            corr = corr + g[j] * hermite(j, z)
    return norm_cdf(z) - norm_pdf(z) * corr


def characteristic_function(gammas, t, convention=BRACKET):
    """chi(t) = exp(-t^2/2) [1 + sum_j (it)^j gamma_j] (or the shifted variant)."""
    g = _as_gamma_array(gammas)
    t = np.asarray(t, dtype=float)
    it = 1j * t
    poly = np.ones_like(it)
    start = 0 if convention == BRACKET else 1
    for j in range(start, 9):
        poly = poly + g[j] * it ** (j + 1)
    base = np.exp(-0.5 * t * t)
    if convention == SHIFT:
        base = base * np.exp(1j * t * g[0])
    elif convention != BRACKET:
        raise ConfigurationError(f"unknown convention {convention!r}")
    return base * poly


def dwad_generic_inputs(inputs, scale=None):
    """Map DWAD constants to the generic U-statistic moments.

    The linear term's moments are sigma_v^2 and kappa1_v, the quadratic
    term's second moment is h^{-d-2} delta_v^2, and E[l_1 l_2 q_12] is
    kappa2_v / 6 so that the generic skewness (k_a + 6 k_b) matches
    kappa1_v + kappa2_v.  ``scale`` defaults to sigma_v / sqrt(n).
    """
    if scale is None:
        scale = inputs.sigma_v / math.sqrt(inputs.n)
    return GenericUstatInputs(
        n=inputs.n,
        bias=inputs.h ** inputs.P * inputs.beta_v,
        scale=scale,
        sigma_ell2=inputs.sigma_v ** 2,
        sigma_q2=inputs.delta_v2 / inputs.h ** (inputs.d + 2),
        kappa_a=inputs.kappa1_v,
        kappa_b=inputs.kappa2_v / 6.0,
    )
