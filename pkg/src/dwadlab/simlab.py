"""Monte Carlo laboratory for the DWAD estimator and its Edgeworth expansions.

Every replication r draws its data from the counter-based stream
``(seed, r, "data")`` (and bootstrap indices from ``(seed, r, "bootstrap")``)
and writes its statistics into slot r of preallocated arrays, so results are a
pure function of the configuration and do not depend on the number of worker
threads.
"""

import dataclasses
import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _pairs, dgp as dgp_mod, edgeworth
from .errors import ConfigurationError
from .estimator import estimate, normal_critical_value
from .kernel import SUPPORTED_ORDERS, make_higher_order_kernel
from .rng import stream

STANDARDIZED_SIGMA = "standardized_sigma"
STANDARDIZED_OMEGA = "standardized_omega"
STUDENTIZED_AL = "studentized_al"
STUDENTIZED_SB = "studentized_sb"
STANDARDIZED_SCHEMES = (STANDARDIZED_SIGMA, STANDARDIZED_OMEGA)
STUDENTIZED_SCHEMES = (STUDENTIZED_AL, STUDENTIZED_SB)
ALL_SCHEMES = STANDARDIZED_SCHEMES + STUDENTIZED_SCHEMES

#: advisory worker count; never changes results
THREADS_ENV = "DWADLAB_THREADS"

#: share of SB-degenerate replications above which a result is unreliable
DEGENERATE_LIMIT = 0.01

#: relative standard error above which bootstrap ratios are flagged
BOOTSTRAP_RSE_LIMIT = 0.20


def resolve_threads(threads=None):
    """Worker count: explicit argument, then the advisory env var, then CPU count."""
    if threads is None:
        raw = os.environ.get(THREADS_ENV)
        if raw:
            try:
                threads = int(raw)
            except ValueError:
                raise ConfigurationError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
        else:
            threads = os.cpu_count() or 1
    if threads < 1:
        raise ConfigurationError(f"thread count must be >= 1, got {threads}")
    return int(threads)


def _parallel_for(func, count, threads):
    """Call func(start, stop) over contiguous blocks of range(count)."""
    threads = resolve_threads(threads)
    if threads == 1 or count < 2:
        func(0, count)
        return
    blocks = min(count, threads * 8)
    edges = np.linspace(0, count, blocks + 1).astype(int)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for fut in [pool.submit(func, a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]:
            fut.result()


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    """One Monte Carlo cell.

    The bandwidth is ``bandwidth`` when given, otherwise
    ``bandwidth_c * n ** (-bandwidth_gamma)``.  ``direction`` defaults to the
    first coordinate axis.
    """

    seed: int
    dgp: str = "linear"
    dim: int = 1
    order: int = 2
    n: int = 1000
    bandwidth: float = None
    bandwidth_c: float = 1.0
    bandwidth_gamma: float = 0.3
    direction: tuple = None
    alphas: tuple = (0.05,)
    replications: int = 1000
    schemes: tuple = ALL_SCHEMES
    noise_sd: float = 1.0
    heteroskedastic: bool = False
    grid_min: float = -4.0
    grid_max: float = 4.0
    grid_points: int = 161

    def __post_init__(self):
        if self.seed is None or int(self.seed) != self.seed or self.seed < 0:
            raise ConfigurationError(f"seed must be a non-negative integer, got {self.seed!r}")
        if self.dgp not in dgp_mod.PRESETS:
            raise ConfigurationError(f"unknown DGP preset {self.dgp!r}; expected one of {dgp_mod.PRESETS}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ConfigurationError(f"dim must be a positive integer, got {self.dim}")
        if self.order not in SUPPORTED_ORDERS:
            raise ConfigurationError(f"kernel order must be one of {SUPPORTED_ORDERS}, got {self.order}")
        if int(self.n) != self.n or self.n < 3:
            raise ConfigurationError(f"n must be an integer >= 3, got {self.n}")
        if self.bandwidth is not None and not (math.isfinite(self.bandwidth) and self.bandwidth > 0):
            raise ConfigurationError(f"bandwidth must be positive, got {self.bandwidth}")
        if self.bandwidth is None and not (self.bandwidth_c > 0 and self.bandwidth_gamma > 0):
            raise ConfigurationError("bandwidth rule needs bandwidth_c > 0 and bandwidth_gamma > 0")
        if int(self.replications) != self.replications or self.replications < 1:
            raise ConfigurationError(f"replications must be a positive integer, got {self.replications}")
        alphas = tuple(float(a) for a in np.atleast_1d(self.alphas))
        if not alphas or any(not 0 < a < 1 for a in alphas):
            raise ConfigurationError(f"alphas must lie in (0, 1), got {alphas}")
        schemes = tuple(self.schemes)
        unknown = [s for s in schemes if s not in ALL_SCHEMES]
        if unknown or not schemes:
            raise ConfigurationError(f"unknown schemes {unknown}; expected a subset of {ALL_SCHEMES}")
        if self.grid_points < 2 or not self.grid_max > self.grid_min:
            raise ConfigurationError("CDF grid needs grid_points >= 2 and grid_max > grid_min")
        v = np.eye(self.dim)[0] if self.direction is None else np.asarray(self.direction, dtype=float)
        if v.shape != (self.dim,) or not np.all(np.isfinite(v)) or not np.any(v):
            raise ConfigurationError(f"direction must be a finite nonzero vector of length {self.dim}")
        object.__setattr__(self, "direction", tuple(float(c) for c in v))
        object.__setattr__(self, "alphas", tuple(sorted(alphas)))
        object.__setattr__(self, "schemes", tuple(s for s in ALL_SCHEMES if s in schemes))
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "replications", int(self.replications))

    @property
    def h(self):
        if self.bandwidth is not None:
            return float(self.bandwidth)
        return float(self.bandwidth_c * self.n ** (-self.bandwidth_gamma))

    @property
    def v(self):
        return np.asarray(self.direction)

    @property
    def grid(self):
        return np.linspace(self.grid_min, self.grid_max, self.grid_points)

    def make_dgp(self):
        return dgp_mod.DgpSpec(self.dgp, self.dim, noise_sd=self.noise_sd,
                               heteroskedastic=self.heteroskedastic)

    def make_kernel(self):
        return make_higher_order_kernel(self.dim, self.order)

    def rate_flags(self):
        """n h^{2P} (should be small) and n h^{d+2} (should not be small)."""
        h = self.h
        return {"n_h_2P": self.n * h ** (2 * self.order), "n_h_d2": self.n * h ** (self.dim + 2)}


# ---------------------------------------------------------------------------
# replications
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True, eq=False)
class ReplicationData:
    """Per-replication quadratic forms along the configured direction."""

    theta_v: np.ndarray
    var_al: np.ndarray
    var_sb: np.ndarray
    delta_v: np.ndarray

    @property
    def replications(self):
        return self.theta_v.shape[0]


def replicate(config, threads=None):
    """Fit the estimator on every replication of ``config``."""
    model = config.make_dgp()
    kernel = config.make_kernel()
    v, h, R = config.v, config.h, config.replications
    out = np.empty((4, R))

    def work(start, stop):
        for r in range(start, stop):
            fit = estimate(dgp_mod.sample(model, config.n, stream(config.seed, r, "data")), kernel, h)
            out[0, r] = v @ fit.theta_hat
            out[1, r] = v @ fit.v_al @ v
            out[2, r] = v @ fit.v_sb @ v
            out[3, r] = v @ fit.delta_hat @ v

    _parallel_for(work, R, threads)
    return ReplicationData(*out)


# ---------------------------------------------------------------------------
# distributional summaries
# ---------------------------------------------------------------------------

def kolmogorov_distance(stats, cdf):
    """sup_x |F_R(x) - cdf(x)| for the empirical CDF F_R of ``stats``.

    Evaluated at the order statistics, which is exact for a continuous,
    non-decreasing ``cdf``.
    """
    s = np.sort(np.asarray(stats, dtype=float))
    R = s.shape[0]
    if R == 0:
        raise ConfigurationError("Kolmogorov distance needs at least one statistic")
    F = np.asarray(cdf(s), dtype=float)
    i = np.arange(1, R + 1)
    return float(max(np.max(i / R - F), np.max(F - (i - 1) / R)))


def empirical_cdf(stats, grid):
    """Right-continuous empirical CDF of ``stats`` evaluated on ``grid``."""
    s = np.sort(np.asarray(stats, dtype=float))
    return np.searchsorted(s, grid, side="right") / s.shape[0]


def dkw_floor(R, level=0.05):
    """sqrt(log(2/level) / (2R)), the DKW bound on sup |F_R - F| at that level."""
    return math.sqrt(math.log(2.0 / level) / (2.0 * R))


@dataclasses.dataclass(frozen=True)
class CoverageRow:
    alpha: float
    empirical: float
    se: float
    predicted: float

    @property
    def gap(self):
        return self.empirical - self.predicted


@dataclasses.dataclass(frozen=True, eq=False)
class SchemeResult:
    name: str
    statistic: np.ndarray
    ecdf: np.ndarray
    expansion: np.ndarray
    ks_phi: float
    ks_expansion: float
    coverage: tuple
    excluded: int

    def coverage_at(self, alpha):
        for row in self.coverage:
            if row.alpha == alpha:
                return row
        raise KeyError(alpha)


@dataclasses.dataclass(frozen=True, eq=False)
class ExperimentResult:
    config: ExperimentConfig
    functionals: object
    grid: np.ndarray
    schemes: dict
    diagnostics: dict

    @property
    def unreliable(self):
        return bool(self.diagnostics.get("unreliable", False))

    def __getitem__(self, name):
        return self.schemes[name]


def _expansion_for(scheme, inputs):
    if scheme in STANDARDIZED_SCHEMES:
        return lambda x: edgeworth.std_expansion(inputs, x)
    if scheme == STUDENTIZED_AL:
        return lambda x: edgeworth.studentized_al(inputs, x)
    return lambda x: edgeworth.studentized_sb(inputs, x)


_COVERAGE_SCHEME = {
    STANDARDIZED_SIGMA: edgeworth.STANDARDIZED,
    STANDARDIZED_OMEGA: edgeworth.STANDARDIZED,
    STUDENTIZED_AL: edgeworth.STUDENTIZED_AL,
    STUDENTIZED_SB: edgeworth.STUDENTIZED_SB,
}


def _check_functionals(config, functionals):
    if functionals is None:
        return dgp_mod.population_functionals(config.make_dgp(), config.make_kernel(), config.v)
    if (functionals.d != config.dim or functionals.P != config.order
            or not np.allclose(functionals.v, config.v)):
        raise ConfigurationError("population functionals do not match the experiment's (d, P, direction)")
    return functionals


def run_experiment(config, functionals=None, data=None, threads=None, schemes=None):
    """Run (or reuse) the replications and summarize every requested scheme."""
    functionals = _check_functionals(config, functionals)
    schemes = config.schemes if schemes is None else tuple(s for s in config.schemes if s in schemes)
    if not schemes:
        raise ConfigurationError("no schemes selected for this run")
    if data is None:
        data = replicate(config, threads)
    elif data.replications != config.replications:
        raise ConfigurationError("replication data does not match the configured replication count")
    n, h = config.n, config.h
    theta_v = functionals.theta_v
    sigma2 = functionals.sigma_v2
    omega2 = functionals.omega_v2(n, h)
    grid = config.grid
    out = {}
    degenerate = int(np.count_nonzero(~(data.var_sb > 0)))
    for scheme in schemes:
        excluded = 0
        if scheme == STANDARDIZED_SIGMA:
            stat = (data.theta_v - theta_v) / math.sqrt(sigma2 / n)
            ratio = omega2 * n / sigma2
        elif scheme == STANDARDIZED_OMEGA:
            stat = (data.theta_v - theta_v) / math.sqrt(omega2)
            ratio = 1.0
        else:
            var = data.var_al if scheme == STUDENTIZED_AL else data.var_sb
            keep = var > 0
            excluded = int(np.count_nonzero(~keep))
            stat = (data.theta_v[keep] - theta_v) / np.sqrt(var[keep])
            ratio = 1.0
        inputs = functionals.expansion_inputs(n, h, vartheta_ratio=ratio)
        expansion = _expansion_for(scheme, inputs)
        if stat.size == 0:
            raise ConfigurationError(f"every replication was excluded for scheme {scheme}")
        coverage = []
        for alpha in config.alphas:
            c = normal_critical_value(alpha)
            p = float(np.mean(np.abs(stat) <= c))
            coverage.append(CoverageRow(alpha, p, math.sqrt(p * (1 - p) / stat.size),
                                        edgeworth.coverage_prediction(inputs, alpha, _COVERAGE_SCHEME[scheme])))
        out[scheme] = SchemeResult(
            name=scheme, statistic=stat, ecdf=empirical_cdf(stat, grid), expansion=expansion(grid),
            ks_phi=kolmogorov_distance(stat, edgeworth.norm_cdf),
            ks_expansion=kolmogorov_distance(stat, expansion),
            coverage=tuple(coverage), excluded=excluded,
        )
    flags = config.rate_flags()
    diagnostics = {
        "replications": config.replications,
        "n": n,
        "h": h,
        "n_h_2P": flags["n_h_2P"],
        "n_h_d2": flags["n_h_d2"],
        "r_n": edgeworth.rn(n, h, config.order, config.dim),
        "theta_v": theta_v,
        "sigma_v2": sigma2,
        "delta_v2": functionals.delta_v2,
        "omega_v2": omega2,
        "beta_v": functionals.beta_v,
        "kappa1_v": functionals.kappa1_v,
        "kappa2_v": functionals.kappa2_v,
        "sb_degenerate": degenerate,
        "unreliable": degenerate > DEGENERATE_LIMIT * config.replications,
        "distributional_comparison_ok": config.replications >= 1000,
        "dkw_floor": dkw_floor(config.replications),
    }
    return ExperimentResult(config, functionals, grid, out, diagnostics)


def run_standardized(config, functionals=None, data=None, threads=None):
    """Standardized statistics (theta_hat_v - theta_v) / vartheta_v against Phi and G."""
    wanted = [s for s in config.schemes if s in STANDARDIZED_SCHEMES] or list(STANDARDIZED_SCHEMES)
    config = dataclasses.replace(config, schemes=tuple(wanted))
    return run_experiment(config, functionals, data, threads)


def run_studentized(config, functionals=None, data=None, threads=None):
    """t-statistics under V_AL and V_SB against Phi, G_AL and G_SB, with coverage."""
    wanted = [s for s in config.schemes if s in STUDENTIZED_SCHEMES] or list(STUDENTIZED_SCHEMES)
    config = dataclasses.replace(config, schemes=tuple(wanted))
    return run_experiment(config, functionals, data, threads)


TABLE_COLUMNS = ("scheme", "alpha", "n", "h", "KS_to_Phi", "KS_to_expansion", "coverage_emp",
                 "coverage_pred", "r_n")


def edgeworth_comparison_table(*results):
    """One row per (scheme, alpha), sorted by scheme then alpha."""
    rows = []
    for res in results:
        cfg = res.config
        r_n = edgeworth.rn(cfg.n, cfg.h, cfg.order, cfg.dim)
        for name, sr in res.schemes.items():
            for row in sr.coverage:
                rows.append({
                    "scheme": name, "alpha": row.alpha, "n": cfg.n, "h": cfg.h,
                    "KS_to_Phi": sr.ks_phi, "KS_to_expansion": sr.ks_expansion,
                    "coverage_emp": row.empirical, "coverage_pred": row.predicted, "r_n": r_n,
                })
    rows.sort(key=lambda r: (r["scheme"], r["alpha"], r["n"], r["h"]))
    return rows


# ---------------------------------------------------------------------------
# bootstrap diagnostic
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class BootstrapDraws:
    """Bootstrap moments for one original sample.

    ``qbar_var`` uses the population projection c(z) = E[v'U(z, Z)] to split
    theta_hat* into L* and Q*; ``qbar_var_empirical`` uses the projection of
    the empirical distribution instead.
    """

    theta_var: float
    qbar_var: float
    qbar_var_empirical: float
    sigma_star_mean: float
    sigma_hat: float
    theta_hat: float


def bootstrap_sample_moments(sample, kernel, h, v, draws, rng, projection=None):
    """Nonparametric bootstrap of the quadratic component on one sample.

    Each draw recomputes theta_hat* and Sigma_hat* on the resampled data.
    ``projection`` maps (y, x) to the population conditional mean
    E[v'U_12 | Z_1]; without it only the empirical-projection variance is
    meaningful and ``qbar_var`` repeats it.
    """
    n = sample.n
    v = np.asarray(v, dtype=float)
    M = _pairs.pair_matrix(sample.y, sample.x, float(h), np.asarray(kernel.coef, dtype=float), v)
    npairs = math.comb(n, 2)
    rows = M.sum(axis=1)
    theta_hat = rows.sum() / (2.0 * npairs)
    L = 2.0 * (rows / (n - 1) - theta_hat)
    sigma_hat = float(L @ L / n)
    c_emp = rows / n
    c_pop = c_emp if projection is None else np.asarray(projection(sample.y, sample.x), dtype=float)
    theta_s = np.empty(draws)
    qs_pop = np.empty(draws)
    qs_emp = np.empty(draws)
    sig_s = np.empty(draws)
    for b in range(draws):
        w = np.bincount(rng.integers(0, n, size=n), minlength=n).astype(float)
        Mw = M @ w
        th = (w @ Mw) / (2.0 * npairs)
        theta_s[b] = th
        qs_pop[b] = th - 2.0 * (w @ c_pop / n - c_pop.mean())
        qs_emp[b] = th - 2.0 * (w @ c_emp / n - c_emp.mean())
        Ls = 2.0 * (Mw / (n - 1) - th)
        sig_s[b] = float(w @ (Ls * Ls) / n)
    return BootstrapDraws(
        theta_var=float(np.var(theta_s, ddof=1)), qbar_var=float(np.var(qs_pop, ddof=1)),
        qbar_var_empirical=float(np.var(qs_emp, ddof=1)), sigma_star_mean=float(sig_s.mean()),
        sigma_hat=sigma_hat, theta_hat=float(theta_hat),
    )


@dataclasses.dataclass(frozen=True)
class BootstrapReport:
    outer: int
    draws: int
    n: int
    h: float
    v_qbar: float
    v_qbar_mc: float
    ratio: float
    ratio_se: float
    ratio_empirical_projection: float
    sigma_factor: float
    sigma_factor_se: float
    degenerate: bool

    @property
    def unstable(self):
        if self.degenerate:
            return True
        return (self.ratio_se > BOOTSTRAP_RSE_LIMIT * abs(self.ratio)
                or self.sigma_factor_se > BOOTSTRAP_RSE_LIMIT * abs(self.sigma_factor))


def bootstrap_diagnostic(config, bootstrap_draws=200, outer=50, threads=None, quad_tol=1e-7):
    """Bootstrap-to-sampling variance ratio of the quadratic term.

    V[Q] is the exact C(n,2)^{-1} E[q_12^2] at the configured bandwidth
    (quadrature); its Monte Carlo counterpart over the outer replications is
    reported as ``v_qbar_mc``.  The Sigma_hat* factor compares the excess of
    E[Sigma_hat*] over sigma_ell^2 with the excess of E[Sigma_hat].
    """
    if bootstrap_draws < 2 or outer < 2:
        raise ConfigurationError("bootstrap diagnostic needs at least 2 draws and 2 outer replications")
    model, kernel, v, h, n = config.make_dgp(), config.make_kernel(), config.v, config.h, config.n
    moments = dgp_mod.finite_bandwidth_moments(model, kernel, v, h, tol=quad_tol)

    def projection(y, x):
        a1, a0 = dgp_mod.conditional_mean_coefficients(model, kernel, v, h, x)
        return a1 * y + a0

    res = [None] * outer
    qbar = np.empty(outer)

    def work(start, stop):
        for r in range(start, stop):
            s = dgp_mod.sample(model, n, stream(config.seed, r, "data"))
            res[r] = bootstrap_sample_moments(s, kernel, h, v, bootstrap_draws,
                                              stream(config.seed, r, "bootstrap"), projection)
            c = projection(s.y, s.x)
            qbar[r] = res[r].theta_hat - moments.mean - 2.0 * (c.mean() - moments.mean)

    _parallel_for(work, outer, threads)
    v_qbar = moments.sigma_q2 / math.comb(n, 2)
    qv = np.array([r.qbar_var for r in res])
    qe = np.array([r.qbar_var_empirical for r in res])
    degenerate = not (v_qbar > 0 and np.all(np.isfinite(qv)) and qv.mean() > 0)
    if degenerate:
        nan = float("nan")
        return BootstrapReport(outer, bootstrap_draws, n, h, v_qbar, float(np.var(qbar, ddof=1)),
                               nan, nan, nan, nan, nan, True)
    ratio = float(qv.mean() / v_qbar)
    ratio_se = float(qv.std(ddof=1) / math.sqrt(outer) / v_qbar)
    num = np.array([r.sigma_star_mean for r in res]) - moments.sigma_ell2
    den = np.array([r.sigma_hat for r in res]) - moments.sigma_ell2
    factor = float(num.mean() / den.mean())
    factor_se = float(np.std(num - factor * den, ddof=1) / math.sqrt(outer) / abs(den.mean()))
    return BootstrapReport(
        outer=outer, draws=bootstrap_draws, n=n, h=h, v_qbar=v_qbar,
        v_qbar_mc=float(np.var(qbar, ddof=1)), ratio=ratio, ratio_se=ratio_se,
        ratio_empirical_projection=float(qe.mean() / v_qbar),
        sigma_factor=factor, sigma_factor_se=factor_se, degenerate=False,
    )


# ---------------------------------------------------------------------------
# smoothing-bias constant
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class BiasCheck:
    bandwidths: tuple
    scaled_bias: tuple
    scaled_bias_se: tuple
    extrapolants: tuple
    beta_v: float
    tolerance: float

    @property
    def estimate(self):
        return self.extrapolants[-1]

    @property
    def relative_error(self):
        return abs(self.estimate - self.beta_v) / abs(self.beta_v)

    @property
    def passed(self):
        return self.relative_error <= self.tolerance


def bias_constant_check(config, bandwidths=(0.4, 0.2, 0.1), functionals=None, threads=None,
                        tolerance=0.05):
    """Monte Carlo (E[theta_hat_v] - theta_v) / h^P at dyadic bandwidths, Richardson-extrapolated.

    E[theta_hat_v] is estimated from ``config.replications`` samples shared by
    all bandwidths.  Two exact variance reductions are used: theta_hat is
    linear in Y, so outcomes are replaced by g(X) without changing its mean,
    and the mean-zero influence average psi_bar_v is subtracted as a control
    variate.
    """
    hs = tuple(float(h) for h in bandwidths)
    levels = len(hs)
    if levels < 2 or any(not math.isclose(hs[k] / hs[k + 1], 2.0) for k in range(levels - 1)):
        raise ConfigurationError(f"bandwidths must halve successively, got {hs}")
    functionals = _check_functionals(config, functionals)
    model, kernel, v, n = config.make_dgp(), config.make_kernel(), config.v, config.n
    coef = np.asarray(kernel.coef, dtype=float)
    R = config.replications
    vals = np.empty((R, levels))
    npairs = math.comb(n, 2)

    def work(start, stop):
        for r in range(start, stop):
            s = model.noiseless(dgp_mod.sample(model, n, stream(config.seed, r, "data")))
            sums = _pairs.theta_dyadic(s.y, s.x, hs[0], levels, coef)
            cv = model.influence(s.y, s.x, functionals.theta).mean(axis=0) @ v
            vals[r] = sums @ v / npairs - cv

    _parallel_for(work, R, threads)
    P = config.order
    bias = vals.mean(axis=0) - functionals.theta_v
    se = vals.std(axis=0, ddof=1) / math.sqrt(R)
    scaled = [bias[k] / hs[k] ** P for k in range(levels)]
    # scaled bias = beta + c1 h^2 + c2 h^4 + ...
    table = dgp_mod._richardson(scaled, 2.0, tuple(2 * (j + 1) for j in range(levels)))
    extrap = tuple(float(row[-1]) for row in table)
    return BiasCheck(hs, tuple(float(s) for s in scaled), tuple(float(se[k] / hs[k] ** P) for k in range(levels)),
                     extrap, functionals.beta_v, tolerance)
