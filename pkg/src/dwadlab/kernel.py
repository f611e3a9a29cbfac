"""Even product kernels of order P built from polynomial-weighted Gaussians.

The one-dimensional building block is

    k_P(u) = (c_0 + c_1 u^2 + ... + c_{M-1} u^{2(M-1)}) * phi(u),   M = P / 2,

with coefficients chosen so that k_P integrates to one and its even moments
of order 2, ..., P - 2 vanish.  The d-dimensional kernel is the product
K(u) = k_P(u_1) ... k_P(u_d).
"""

import dataclasses
import math
from fractions import Fraction

import numpy as np

from . import quadrature
from .errors import AssumptionViolation, ConfigurationError, NumericalError

SUPPORTED_ORDERS = (2, 4, 6, 8)

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _double_factorial(k):
    # (k)!! for odd k >= -1; (-1)!! = 1
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


def gaussian_moment(k):
    """E[Z^k] for Z ~ N(0, 1)."""
    if k % 2:
        return 0
    return _double_factorial(k - 1)


@dataclasses.dataclass(frozen=True)
class MultiIndex:
    """A multi-index a = (a_1, ..., a_d) of non-negative integers."""

    entries: tuple

    def __post_init__(self):
        entries = tuple(int(a) for a in self.entries)
        if any(a < 0 for a in entries):
            raise ConfigurationError(f"multi-index entries must be >= 0, got {entries}")
        object.__setattr__(self, "entries", entries)

    @property
    def order(self):
        return sum(self.entries)

    @property
    def dim(self):
        return len(self.entries)

    def factorial(self):
        return math.prod(math.factorial(a) for a in self.entries)

    def monomial(self, x):
        """x^a evaluated row-wise for x of shape (..., d)."""
        x = np.asarray(x, dtype=float)
        return np.prod(x ** np.asarray(self.entries), axis=-1)

    def __str__(self):
        return "(" + ",".join(str(a) for a in self.entries) + ")"

    @classmethod
    def all_of_order(cls, d, order):
        return [cls(a) for a in quadrature.multi_indices(d, order)]


def order_coefficients(P):
    """Exact coefficients (as Fractions) of the order-P polynomial-Gaussian kernel."""
    if P not in SUPPORTED_ORDERS:
        raise ConfigurationError(
            f"kernel order {P} not supported; allowed orders are {SUPPORTED_ORDERS}"
        )
    M = P // 2
    A = [[Fraction(gaussian_moment(2 * (j + m))) for m in range(M)] for j in range(M)]
    b = [Fraction(1)] + [Fraction(0)] * (M - 1)
    # Gauss-Jordan in exact arithmetic; the moment (Hankel) matrix is positive definite
    for col in range(M):
        piv = A[col][col]
        for row in range(M):
            if row != col and A[row][col] != 0:
                f = A[row][col] / piv
                A[row] = [a - f * p for a, p in zip(A[row], A[col])]
                b[row] -= f * b[col]
    return [b[j] / A[j][j] for j in range(M)]


def moment_system_residual(coef):
    """Max-abs residual of ``coef`` in the defining moment system."""
    M = len(coef)
    A = np.array([[gaussian_moment(2 * (j + m)) for m in range(M)] for j in range(M)], dtype=float)
    rhs = np.zeros(M)
    rhs[0] = 1.0
    return float(np.max(np.abs(A @ np.asarray(coef, dtype=float) - rhs)))


@dataclasses.dataclass(frozen=True, eq=False)
class KernelSpec:
    """An even product kernel K on R^d together with its Assumption-2 constants.

    Attributes
    ----------
    dim : int
    order : int
        Kernel order P; moments of order 1, ..., P-1 vanish.
    coef : tuple of float
        Coefficients of the even polynomial multiplying phi in one coordinate.
    moments : dict
        Map from :class:`MultiIndex` with order P to mu_a.
    roughness : ndarray
        The d x d matrix of integrals of grad K grad K'.
    """

    dim: int
    order: int
    coef: tuple
    moments: dict = dataclasses.field(default_factory=dict)
    roughness: np.ndarray = None

    # ---- one-dimensional factor -------------------------------------------------
    def _poly(self, u):
        u2 = u * u
        p = np.zeros_like(u)
        dp = np.zeros_like(u)
        for m in reversed(range(len(self.coef))):
            p = p * u2 + self.coef[m]
        for m in reversed(range(1, len(self.coef))):
            dp = dp * u2 + 2 * m * self.coef[m]
        return p, dp * u

    def factor(self, u):
        """k_P(u) elementwise."""
        u = np.asarray(u, dtype=float)
        p, _ = self._poly(u)
        return p * _INV_SQRT_2PI * np.exp(-0.5 * u * u)

    def factor_deriv(self, u):
        """k_P'(u) elementwise."""
        u = np.asarray(u, dtype=float)
        p, dp = self._poly(u)
        return (dp - u * p) * _INV_SQRT_2PI * np.exp(-0.5 * u * u)

    # ---- d-dimensional kernel ---------------------------------------------------
    def _check_points(self, u):
        u = np.asarray(u, dtype=float)
        if u.ndim == 0 or u.shape[-1] != self.dim:
            if self.dim == 1:
                return u[..., None]
            raise ConfigurationError(f"points must have trailing dimension {self.dim}")
        return u

    def eval(self, u):
        """K(u) for u of shape (..., d)."""
        u = self._check_points(u)
        return np.prod(self.factor(u), axis=-1)

    __call__ = eval

    def grad(self, u):
        """Gradient of K at u; returns an array of shape (..., d)."""
        u = self._check_points(u)
        k = self.factor(u)
        dk = self.factor_deriv(u)
        out = np.empty_like(u)
        for j in range(self.dim):
            others = np.prod(np.delete(k, j, axis=-1), axis=-1) if self.dim > 1 else 1.0
            out[..., j] = dk[..., j] * others
        return out

    def factor_moment(self, k):
        """Exact one-dimensional moment of the factor, int u^k k_P(u) du."""
        return float(sum(c * gaussian_moment(2 * m + k) for m, c in enumerate(self.coef)))

    def moment_vector(self):
        """Moments mu_a ordered as :meth:`MultiIndex.all_of_order` (d, P)."""
        return np.array([self.moments[a] for a in MultiIndex.all_of_order(self.dim, self.order)])


def _quad_moment(kernel, a, tol):
    return float(quadrature.integrate(lambda u: a.monomial(u) * kernel.eval(u), kernel.dim, tol=tol))


def roughness_matrix(kernel, tol=1e-8):
    """int grad K(u) grad K(u)' du, symmetrized and checked for positive definiteness."""
    d = kernel.dim

    def outer(u):
        g = kernel.grad(u)
        return g[:, :, None] * g[:, None, :]

    R = quadrature.integrate(outer, d, tol=tol, scale=1.0 / math.sqrt(2.0))
    R = 0.5 * (R + R.T)
    lam = np.linalg.eigvalsh(R)[0]
    if not lam > 0:
        raise AssumptionViolation(
            f"roughness matrix is not positive definite (smallest eigenvalue {lam:.3e})"
        )
    return R


def _build(d, P, coef, tol):
    if int(d) != d or d < 1:
        raise ConfigurationError(f"kernel dimension must be a positive integer, got {d}")
    base = KernelSpec(dim=int(d), order=P, coef=tuple(float(c) for c in coef))
    moments = {a: _quad_moment(base, a, tol) for a in MultiIndex.all_of_order(base.dim, P)}
    return dataclasses.replace(base, moments=moments, roughness=roughness_matrix(base, tol))


def make_higher_order_kernel(d, P, tol=1e-8):
    """Product polynomial-Gaussian kernel of order ``P`` on R^d."""
    return _build(d, P, order_coefficients(P), tol)


def make_gaussian_kernel(d, tol=1e-8):
    """Standard d-dimensional Gaussian density as an order-2 kernel."""
    return _build(d, 2, [1], tol)


@dataclasses.dataclass
class MomentRow:
    index: MultiIndex
    value: float
    target: float
    abs_error: float
    passed: bool


@dataclasses.dataclass
class MomentReport:
    rows: list
    abs_kernel_integral: float
    abs_gradient_integral: float
    tol: float

    @property
    def all_pass(self):
        return (
            all(r.passed for r in self.rows)
            and np.isfinite(self.abs_kernel_integral)
            and np.isfinite(self.abs_gradient_integral)
        )

    def failures(self):
        return [r for r in self.rows if not r.passed]


def verify_moments(kernel, tol=1e-6, quad_tol=None):
    """Check the moment conditions of ``kernel`` up to its order by quadrature.

    Every multi-index with order at most P is integrated; targets are 1 for the
    zero index, 0 for orders 1..P-1 and the kernel's stored mu_a at order P.
    """
    if quad_tol is None:
        quad_tol = min(tol, 1e-8) * 1e-2
    d, P = kernel.dim, kernel.order
    rows = []
    for order in range(P + 1):
        for a in MultiIndex.all_of_order(d, order):
            try:
                value = _quad_moment(kernel, a, quad_tol)
            except NumericalError as exc:
                raise NumericalError(f"moment {a}: {exc}") from exc
            if order == 0:
                target = 1.0
            elif order < P:
                target = 0.0
            else:
                target = float(kernel.moments.get(a, np.nan))
            err = abs(value - target)
            rows.append(MomentRow(a, value, target, err, bool(err <= tol)))

    # |K| and |grad K| have kinks, so use a single fine rule instead of refinement
    m = 80 if d <= 2 else (24 if d == 3 else 12)
    norm = lambda u: np.sqrt(np.sum(u * u, axis=-1))
    abs_k = float(quadrature.lebesgue_integral(
        lambda u: np.abs(kernel.eval(u)) * (1 + norm(u) ** P), d, m))
    abs_g = float(quadrature.lebesgue_integral(
        lambda u: norm(kernel.grad(u)) * (1 + norm(u) ** 2), d, m))
    return MomentReport(rows, abs_k, abs_g, tol)
