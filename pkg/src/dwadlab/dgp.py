"""Simulation designs with closed-form densities and regressions.

Covariates are standard Gaussian on R^d, the regression depends on the index
t = b'x, and the outcome noise is Gaussian (optionally heteroskedastic).  All
population constants of the expansions are computed by deterministic
quadrature from the closed forms.
"""

import dataclasses
import math

import numpy as np

from . import quadrature
from .edgeworth import DwadExpansionInputs, hermite
from .errors import ConfigurationError, NumericalError
from .estimator import Sample
from .kernel import MultiIndex

PRESETS = ("linear", "cubic_damped")

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclasses.dataclass(frozen=True, eq=False)
class DgpSpec:
    """Y = g(X) + s(X) eps with X ~ N(0, I_d), eps ~ N(0, 1) independent.

    ``regression`` selects g(x) = r(b'x): ``linear`` uses r(t) = t and
    ``cubic_damped`` uses r(t) = (t + t^3) exp(-t^2/4).  When
    ``heteroskedastic`` is set, s(x) = noise_sd * (1 + x_1^2 / (2 (1 + x_1^2))).
    """

    regression: str = "linear"
    dim: int = 1
    slope: tuple = None
    noise_sd: float = 1.0
    heteroskedastic: bool = False

    def __post_init__(self):
        if self.regression not in PRESETS:
            raise ConfigurationError(
                f"unknown DGP preset {self.regression!r}; expected one of {PRESETS}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ConfigurationError(f"dimension must be a positive integer, got {self.dim}")
        slope = np.ones(self.dim) if self.slope is None else np.asarray(self.slope, dtype=float)
        if slope.shape != (self.dim,):
            raise ConfigurationError(f"slope must have length {self.dim}")
        if self.noise_sd < 0:
            raise ConfigurationError(f"noise_sd must be >= 0, got {self.noise_sd}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "slope", tuple(float(b) for b in slope))

    @property
    def name(self):
        return self.regression

    # ---- closed forms (x has shape (N, d)) -------------------------------------
    def density(self, x):
        return _INV_SQRT_2PI ** self.dim * np.exp(-0.5 * np.sum(x * x, axis=-1))

    def density_grad(self, x):
        return -x * self.density(x)[..., None]

    def density_partial(self, x, a):
        """Mixed partial derivative d^a f / dx^a."""
        out = self.density(x)
        for j, aj in enumerate(a):
            if aj:
                out = out * ((-1) ** aj) * hermite(aj, x[..., j])
        return out

    def _index(self, x):
        return x @ np.asarray(self.slope)

    def _r(self, t, k=0):
        if self.regression == "linear":
            return t if k == 0 else (np.ones_like(t) if k == 1 else np.zeros_like(t))
        t2 = t * t
        damp = np.exp(-0.25 * t2)
        if k == 0:
            return t * (1 + t2) * damp
        if k == 1:
            return (1 + t2 * (2.5 - 0.5 * t2)) * damp
        raise ValueError(k)

    def regression_fn(self, x):
        return self._r(self._index(x))

    def regression_grad(self, x):
        return self._r(self._index(x), 1)[..., None] * np.asarray(self.slope)

    def noise_sd_fn(self, x):
        if not self.heteroskedastic:
            return np.full(x.shape[:-1], float(self.noise_sd))
        x1 = x[..., 0] ** 2
        return self.noise_sd * (1.0 + 0.5 * x1 / (1.0 + x1))

    def cond_var(self, x):
        return self.noise_sd_fn(x) ** 2

    def second_moment(self, x):
        """v(x) = E[Y^2 | X = x]."""
        return self.regression_fn(x) ** 2 + self.cond_var(x)

    def product(self, x):
        """e(x) = f(x) g(x)."""
        return self.density(x) * self.regression_fn(x)

    def product_grad(self, x):
        return (self.density_grad(x) * self.regression_fn(x)[..., None]
                + self.density(x)[..., None] * self.regression_grad(x))

    def influence(self, y, x, theta):
        """psi(Z) = 2 [edot(X) - Y fdot(X) - theta] row-wise, shape (n, d)."""
        return 2.0 * (self.product_grad(x) - y[:, None] * self.density_grad(x) - theta)

    def noiseless(self, sample):
        """The sample with each outcome replaced by its conditional mean."""
        return Sample(self.regression_fn(sample.x), sample.x)


def sample(dgp, n, stream):
    """Draw n observations using the generator ``stream``."""
    if n < 3:
        raise ConfigurationError(f"sample size must be >= 3, got {n}")
    x = stream.standard_normal((n, dgp.dim))
    eps = stream.standard_normal(n)
    y = dgp.regression_fn(x) + dgp.noise_sd_fn(x) * eps
    return Sample(y, x)


# ---------------------------------------------------------------------------
# population functionals
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True, eq=False)
class PopulationFunctionals:
    """Population constants for a (DGP, kernel, direction) triple.

    ``beta_v`` is normalized so that E[theta_hat_v] - theta_v = h^P beta_v + o(h^P).
    ``kappa2_ustat`` is the limit of E[l_1 l_2 q_12]; ``kappa2_v`` is six times
    that, the quantity that enters the skewness of theta_hat_v alongside kappa1_v.
    """

    v: np.ndarray
    d: int
    P: int
    theta: np.ndarray
    Sigma: np.ndarray
    Delta: np.ndarray
    beta_v: float
    kappa1_v: float
    kappa2_v: float
    kappa2_ustat: float
    cond_var_density: float
    diagnostics: dict = dataclasses.field(default_factory=dict)

    @property
    def theta_v(self):
        return float(self.v @ self.theta)

    @property
    def sigma_v2(self):
        return float(self.v @ self.Sigma @ self.v)

    @property
    def delta_v2(self):
        return float(self.v @ self.Delta @ self.v)

    def omega_v2(self, n, h):
        """Leading-term variance sigma_v^2/n + C(n,2)^{-1} h^{-d-2} delta_v^2."""
        return self.sigma_v2 / n + self.delta_v2 / (math.comb(n, 2) * h ** (self.d + 2))

    def expansion_inputs(self, n, h, vartheta_ratio=1.0):
        return DwadExpansionInputs(
            n=n, h=h, d=self.d, P=self.P,
            sigma_v=math.sqrt(self.sigma_v2), delta_v2=self.delta_v2,
            beta_v=self.beta_v, kappa1_v=self.kappa1_v, kappa2_v=self.kappa2_v,
            vartheta_ratio=vartheta_ratio,
        )


def _outer_levels(d):
    return {1: (40, 80, 160, 320), 2: (40, 80, 120, 160), 3: (32, 48, 64, 80, 100)}.get(d, (8, 10, 12))


def _nested_outer(d):
    return {1: 120, 2: 60, 3: 20}.get(d, 10)


def _inner_nodes(d):
    return {1: 40, 2: 24, 3: 10}.get(d, 6)


def _directional_derivative(fn, x, v, step=1e-3):
    """v'grad fn(x) by a five-point central stencil."""
    s = step
    return (-fn(x + 2 * s * v) + 8 * fn(x + s * v) - 8 * fn(x - s * v) + fn(x - 2 * s * v)) / (12 * s)


def _smoothed_directional(fn, x, kernel, v, h, m_inner):
    """-h^{-1} int v'Kdot(u) fn(x + h u) du by Gauss-Hermite in u.

    Tends to v'grad fn(x) as h -> 0 with error O(h^P).
    """
    z, w = quadrature.tensor_grid(m_inner, kernel.dim)
    weight = (kernel.grad(z) @ v) / (_INV_SQRT_2PI ** kernel.dim * np.exp(-0.5 * np.sum(z * z, axis=1)))
    parts = []
    chunk = max(1, 400_000 // len(z))
    for s in range(0, x.shape[0], chunk):
        xs = x[s:s + chunk]
        pts = xs[:, None, :] + h * z[None, :, :]
        vals = fn(pts.reshape(-1, kernel.dim))
        vals = vals.reshape((len(xs), len(z)) + vals.shape[1:])
        parts.append(np.tensordot(w * weight, vals, axes=([0], [1])))
    return -np.concatenate(parts, axis=0) / h


def _richardson(values, ratio, powers):
    """Richardson table for values at h, h/ratio, h/ratio^2, ... with error powers."""
    table = [list(values)]
    for p in powers[: len(values) - 1]:
        prev = table[-1]
        fac = ratio ** p
        table.append([(fac * prev[k + 1] - prev[k]) / (fac - 1) for k in range(len(prev) - 1)])
    return table


def _check_direction(v, d):
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.shape != (d,) or not np.any(v):
        raise ConfigurationError(f"direction must be a nonzero vector of length {d}")
    return v


def population_functionals(dgp, kernel, v, tol=1e-8, h0=0.2, extrapolation_tol=0.01):
    """Quadrature truths theta, Sigma, Delta, beta_v, kappa1_v and kappa2_v.

    kappa2_v needs eta_v(Z) = lim_h E[phi_v(Z_1) v'U_12 | Z_2 = Z].  The
    finite-h conditional expectation is computed by nested quadrature at
    h0, h0/2, h0/4 and Richardson-extrapolated to h = 0; the closed-form limit
    (a directional derivative, taken numerically) is computed as a second
    route and recorded in ``diagnostics``.
    """
    if kernel.dim != dgp.dim:
        raise ConfigurationError(f"kernel dimension {kernel.dim} != DGP dimension {dgp.dim}")
    d, P = dgp.dim, kernel.order
    v = _check_direction(v, d)
    levels = _outer_levels(d)
    E = lambda fn: quadrature.expect(fn, d, tol=tol, levels=levels)

    theta = E(lambda x: dgp.density(x)[:, None] * dgp.regression_grad(x))
    theta_ibp = E(lambda x: -2.0 * dgp.regression_fn(x)[:, None] * dgp.density_grad(x))

    def sigma_integrand(x):
        m = 2.0 * (dgp.product_grad(x) - dgp.regression_fn(x)[:, None] * dgp.density_grad(x) - theta)
        fd = dgp.density_grad(x)
        return (m[:, :, None] * m[:, None, :]
                + 4.0 * dgp.cond_var(x)[:, None, None] * fd[:, :, None] * fd[:, None, :])

    Sigma = E(sigma_integrand)
    Sigma = 0.5 * (Sigma + Sigma.T)
    ev_f = float(E(lambda x: dgp.cond_var(x) * dgp.density(x)))
    Delta = 2.0 * ev_f * kernel.roughness

    def kappa1_integrand(x):
        m_v = 2.0 * (dgp.product_grad(x) - dgp.regression_fn(x)[:, None] * dgp.density_grad(x) - theta) @ v
        fd_v = dgp.density_grad(x) @ v
        return m_v ** 3 + 12.0 * m_v * dgp.cond_var(x) * fd_v ** 2

    kappa1 = float(E(kappa1_integrand))

    # smoothing bias constant: E[theta_hat] - theta = h^P beta + o(h^P)
    beta = 0.0
    for a in MultiIndex.all_of_order(d, P):
        mu = kernel.moments[a]
        if mu == 0.0:
            continue

        def bias_integrand(x, a=a):
            acc = np.zeros(x.shape[0])
            for j in range(d):
                if v[j]:
                    b = list(a.entries)
                    b[j] += 1
                    acc += v[j] * dgp.density_partial(x, b)
            return dgp.regression_fn(x) * acc

        beta += mu / a.factorial() * float(E(bias_integrand))
    beta *= -2.0 * (-1) ** P

    kappa2_ustat, diag = _kappa2(dgp, kernel, v, theta, tol, h0, extrapolation_tol)
    diag["theta_ibp"] = theta_ibp
    diag["theta_ibp_gap"] = float(np.max(np.abs(theta - theta_ibp)))
    return PopulationFunctionals(
        v=v, d=d, P=P, theta=theta, Sigma=Sigma, Delta=Delta, beta_v=float(beta),
        kappa1_v=kappa1, kappa2_v=6.0 * kappa2_ustat, kappa2_ustat=kappa2_ustat,
        cond_var_density=ev_f, diagnostics=diag,
    )


def _kappa2(dgp, kernel, v, theta, tol, h0, extrapolation_tol):
    d = dgp.dim
    theta_v = float(v @ theta)

    def parts(x):
        f = dgp.density(x)
        g = dgp.regression_fn(x)
        fdot = -x * f[:, None]
        edot_v = fdot @ v * g + f * (dgp.regression_grad(x) @ v)
        return edot_v, fdot @ v, g, dgp.cond_var(x), f

    # E[phi_v Y | X] f and E[phi_v | X] f with phi_v = 2 (edot_v - Y fdot_v)
    def both(x):
        edot_v, fdot_v, g, s2, f = parts(x)
        return np.stack([2.0 * (edot_v * g - (g * g + s2) * fdot_v) * f,
                         2.0 * (edot_v - g * fdot_v) * f], axis=-1)

    def phi_eta(x, A, B):
        # E[phi_v(Z) (A(X) - Y B(X)) | X]
        edot_v, fdot_v, g, s2, _ = parts(x)
        c = 2.0 * edot_v
        return c * A - (c * B + 2.0 * fdot_v * A) * g + 2.0 * fdot_v * B * (g * g + s2)

    def phi_sq(x):
        edot_v, fdot_v, g, s2, _ = parts(x)
        c = 2.0 * edot_v
        return c * c - 4.0 * c * fdot_v * g + 4.0 * fdot_v ** 2 * (g * g + s2)

    levels = _outer_levels(d)
    e_phi2 = float(quadrature.expect(phi_sq, d, tol=tol, levels=levels))
    var_phi = e_phi2 - 4.0 * theta_v ** 2

    def assemble(e_phi_eta):
        return e_phi_eta - e_phi2 * theta_v - var_phi * theta_v

    def limit_integrand(x):
        AB = _directional_derivative(both, x, v)
        return phi_eta(x, AB[:, 0], AB[:, 1])

    limit_value = float(quadrature.expect(limit_integrand, d, tol=max(tol, 1e-9), levels=levels))

    m_in = _inner_nodes(d)
    m_out = _nested_outer(d)
    hs = [h0, h0 / 2, h0 / 4]
    finite = []
    for h in hs:
        def integrand(x, h=h):
            AB = _smoothed_directional(both, x, kernel, v, h, m_in)
            return phi_eta(x, AB[:, 0], AB[:, 1])
        finite.append(float(quadrature.normal_expectation(integrand, d, m_out)))
    table = _richardson(finite, 2.0, (kernel.order, kernel.order + 2))
    last, prev = table[-1][0], table[-2][-1]
    spread = abs(last - prev) / max(abs(last), 1e-12)
    diag = {
        "kappa2_bandwidths": tuple(hs),
        "kappa2_finite_h": tuple(assemble(f) for f in finite),
        "kappa2_extrapolants": tuple(assemble(t[-1]) for t in table),
        "kappa2_limit_route": assemble(limit_value),
        "kappa2_extrapolation_spread": spread,
    }
    if spread > extrapolation_tol:
        raise NumericalError(
            f"kappa2 extrapolation unstable: last two extrapolants differ by {spread:.2%} "
            f"(tolerance {extrapolation_tol:.0%}); finite-h values {diag['kappa2_finite_h']}")
    kappa2 = assemble(last)
    diag["kappa2_route_gap"] = abs(kappa2 - diag["kappa2_limit_route"])
    return kappa2, diag


# ---------------------------------------------------------------------------
# exact finite-bandwidth moments of u = v'U_12
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class FiniteBandwidthMoments:
    """Hoeffding moments of v'U_12 at a fixed bandwidth.

    ``mean`` is E[u] = E[theta_hat_v], ``sigma_ell2`` is E[l_1^2] with
    l = 2 (E[u|Z] - E[u]), ``sigma_q2`` is E[q_12^2] of the degenerate part.
    """

    h: float
    mean: float
    cond_mean_sq: float
    second_moment: float
    sigma_ell2: float
    sigma_q2: float

    def omega2(self, n):
        """Exact V[theta_hat_v] for sample size n."""
        return self.sigma_ell2 / n + self.sigma_q2 / math.comb(n, 2)


def conditional_mean_coefficients(dgp, kernel, v, h, x, m_inner=None):
    """(a1, a0) with E[v'U_12 | Z_1 = (y, x)] = a1(x) y + a0(x)."""
    v = _check_direction(v, dgp.dim)
    m_inner = m_inner or _inner_nodes(dgp.dim)
    # E[u|Z_1] = -h^{-1} int v'Kdot(w) (y f(x - h w) - e(x - h w)) dw
    a1 = -_smoothed_directional(dgp.density, x, kernel, v, -h, m_inner)
    a0 = _smoothed_directional(dgp.product, x, kernel, v, -h, m_inner)
    return a1, a0


def finite_bandwidth_moments(dgp, kernel, v, h, tol=1e-7):
    """Exact (quadrature) moments of v'U_12 at bandwidth ``h``."""
    d = dgp.dim
    v = _check_direction(v, d)
    levels = _outer_levels(d)

    def first_two(x):
        a1, a0 = conditional_mean_coefficients(dgp, kernel, v, h, x)
        g = dgp.regression_fn(x)
        c_mean = a1 * g + a0
        c_sq = a1 ** 2 * dgp.second_moment(x) + 2 * a1 * a0 * g + a0 ** 2
        return np.stack([c_mean, c_sq], axis=1)

    mean, cond_sq = quadrature.expect(first_two, d, tol=tol, levels=levels)

    zs, ws = quadrature.tensor_grid(_inner_nodes(d) * 2, d)
    us = zs / math.sqrt(2.0)
    jac = (math.sqrt(math.pi) ** d) * np.exp(0.5 * np.sum(zs * zs, axis=1)) * ws
    kd2 = (kernel.grad(us) @ v) ** 2 * jac

    def pair_sq(x):
        out = np.empty(x.shape[0])
        gx, wx = dgp.regression_fn(x), dgp.second_moment(x)
        for k in range(len(us)):
            x2 = x - h * us[k]
            term = (wx + dgp.second_moment(x2) - 2 * gx * dgp.regression_fn(x2)) * dgp.density(x2)
            out = term * kd2[k] if k == 0 else out + term * kd2[k]
        return out

    second = float(quadrature.expect(pair_sq, d, tol=tol, levels=levels)) / h ** (d + 2)
    return FiniteBandwidthMoments(
        h=h, mean=float(mean), cond_mean_sq=float(cond_sq), second_moment=second,
        sigma_ell2=4.0 * (cond_sq - mean ** 2),
        sigma_q2=second - 2.0 * cond_sq + mean ** 2,
    )


# ---------------------------------------------------------------------------
# assumption checklist
# ---------------------------------------------------------------------------

@dataclasses.dataclass
class Check:
    code: str
    description: str
    passed: bool
    detail: str


@dataclasses.dataclass
class AssumptionReport:
    dgp: str
    checks: list

    @property
    def all_pass(self):
        return all(c.passed for c in self.checks)

    def failed(self):
        return [c.code for c in self.checks if not c.passed]

    def __getitem__(self, code):
        for c in self.checks:
            if c.code == code:
                return c
        raise KeyError(code)


def _grid(d, radius, m):
    axis = np.linspace(-radius, radius, m)
    if d == 1:
        return axis[:, None]
    pts = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    return pts


def _bounded(fn, d, name):
    """Heuristic boundedness: no growth between |x|_inf <= 5 and the shell out to 10."""
    m = {1: 401, 2: 81, 3: 31}.get(d, 13)
    pts = _grid(d, 10.0, m)
    vals = np.abs(np.asarray(fn(pts)).reshape(len(pts), -1)).max(axis=1)
    inner = np.max(np.abs(pts), axis=1) <= 5.0
    if not np.all(np.isfinite(vals)):
        return False, f"{name} is not finite on the grid"
    lo, hi = vals[inner].max(), vals[~inner].max()
    ok = hi <= lo * (1 + 1e-6) + 1e-5
    return ok, f"sup {name} on |x|<=5: {lo:.3g}; on 5<|x|<=10: {hi:.3g}"


def _axis_derivatives(fn, x, order, step=1e-3):
    """Central-difference derivatives of order 1..order along each axis, stacked."""
    d = x.shape[1]
    out = []
    for j in range(d):
        e = np.zeros(d)
        e[j] = step
        if order == 1:
            out.append((fn(x + e) - fn(x - e)) / (2 * step))
        elif order == 2:
            out.append((fn(x + e) - 2 * fn(x) + fn(x - e)) / step ** 2)
        else:
            out.append((fn(x + 2 * e) - 2 * fn(x + e) + 2 * fn(x - e) - fn(x - 2 * e)) / (2 * step ** 3))
    return np.stack(out, axis=-1)


def assumption_checklist(dgp, smoothness=4):
    """Numerical spot checks of the regularity conditions on the DGP.

    ``smoothness`` is the order S; density derivatives up to S + 1 are checked.
    """
    d = dgp.dim
    checks = []

    def add(code, desc, result):
        ok, detail = result
        checks.append(Check(code, desc, bool(ok), detail))

    abs_y3 = float(quadrature.normal_expectation(
        lambda z: np.abs(dgp.regression_fn(z[:, :d]) + dgp.noise_sd_fn(z[:, :d]) * z[:, d]) ** 3,
        d + 1, 40 if d <= 2 else 12))
    add("1a", "E|Y|^3 finite", (np.isfinite(abs_y3), f"E|Y|^3 = {abs_y3:.6g}"))

    ok_f, det_f = True, []
    for order in range(smoothness + 2):
        for a in MultiIndex.all_of_order(d, order):
            ok, det = _bounded(lambda x, a=a: dgp.density_partial(x, a.entries), d, f"d^{a} f")
            ok_f &= ok
            if not ok:
                det_f.append(det)
    add("1b", f"f and its first {smoothness + 1} derivatives bounded",
        (ok_f, "; ".join(det_f) or "all density derivatives bounded (Hermite closed form)"))

    res = [_bounded(dgp.regression_grad, d, "gdot")]
    for k in (2, 3):
        res.append(_bounded(lambda x, k=k: _axis_derivatives(dgp.regression_fn, x, k), d,
                            f"axis derivative {k} of g"))
    add("1c", "first three derivatives of g bounded",
        (all(r[0] for r in res), "; ".join(r[1] for r in res)))

    res = [_bounded(dgp.product, d, "e"), _bounded(dgp.product_grad, d, "edot"),
           _bounded(lambda x: _axis_derivatives(dgp.product, x, 2), d, "axis derivative 2 of e")]
    add("1d", "e = f g and its derivatives bounded",
        (all(r[0] for r in res), "; ".join(r[1] for r in res)))

    levels = _outer_levels(d)
    ev_f = float(quadrature.expect(lambda x: dgp.cond_var(x) * dgp.density(x), d, levels=levels))
    theta = quadrature.expect(lambda x: dgp.density(x)[:, None] * dgp.regression_grad(x), d, levels=levels)

    def sig(x):
        m = 2.0 * (dgp.product_grad(x) - dgp.regression_fn(x)[:, None] * dgp.density_grad(x) - theta)
        fd = dgp.density_grad(x)
        return (m[:, :, None] * m[:, None, :]
                + 4.0 * dgp.cond_var(x)[:, None, None] * fd[:, :, None] * fd[:, None, :])

    lam = float(np.linalg.eigvalsh(quadrature.expect(sig, d, levels=levels))[0])
    add("1e", "E[V(Y|X) f(X)] > 0 and Sigma positive definite",
        (ev_f > 0 and lam > 0, f"E[V(Y|X)f(X)] = {ev_f:.6g}; min eig Sigma = {lam:.6g}"))

    res = [_bounded(lambda x: _axis_derivatives(dgp.second_moment, x, 1), d, "axis derivative 1 of v"),
           _bounded(lambda x: _axis_derivatives(dgp.second_moment, x, 2), d, "axis derivative 2 of v"),
           _bounded(lambda x: dgp.second_moment(x)[:, None] * dgp.density_grad(x), d, "v fdot"),
           _bounded(lambda x: (np.abs(dgp.regression_fn(x)) + 2 * dgp.noise_sd_fn(x)) ** 3 * dgp.density(x),
                    d, "E[|Y|^3|X] f bound")]
    add("1f", "v twice differentiable with bounded derivatives; v fdot and E[|Y|^3|X] f bounded",
        (all(r[0] for r in res), "; ".join(r[1] for r in res)))

    probes = [10.0 * np.eye(d)[j] for j in range(d)] + [10.0 * np.ones(d) / math.sqrt(d)]
    tail = max(float(((1 + dgp.second_moment(p[None, :])) * dgp.density(p[None, :]))[0]) for p in probes)
    add("1g", "(1 + v(x)) f(x) -> 0 as |x| -> infinity",
        (tail < 1e-20, f"max (1 + v) f at |x| = 10: {tail:.3e}"))

    if dgp.noise_sd > 0:
        add("1h", "Cramer condition for psi_v(Z)",
            (True, "given X, psi_v(Z) is Gaussian with variance 4 s(X)^2 (v'fdot(X))^2 > 0 on a "
                   "set of positive probability, so its law has an absolutely continuous component"))
    else:
        add("1h", "Cramer condition for psi_v(Z)",
            (False, "noiseless design: not established analytically"))
    return AssumptionReport(dgp.name, checks)
