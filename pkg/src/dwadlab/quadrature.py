"""Tensor-product Gauss-Hermite quadrature on R^d.

Two flavours are provided: expectations under the standard normal law, and
plain Lebesgue integrals whose integrands decay like a Gaussian.  Both refine
the number of nodes per axis until two successive levels agree.
"""

import functools
import itertools

import numpy as np
from numpy.polynomial.hermite_e import hermegauss

from .errors import NumericalError

_SQRT_2PI = np.sqrt(2.0 * np.pi)

#: nodes per axis tried in order by the adaptive rules
DEFAULT_LEVELS = (10, 20, 40, 80)

# cap on the number of tensor grid points (memory bound for d >= 3)
_MAX_POINTS = 2_000_000


@functools.lru_cache(maxsize=None)
def hermite_rule(m):
    """Nodes and weights for E[F(Z)], Z ~ N(0, 1), with ``m`` points."""
    z, w = hermegauss(m)
    w = w / _SQRT_2PI
    z.setflags(write=False)
    w.setflags(write=False)
    return z, w


def tensor_grid(m, d):
    """Return ``(points, weights)`` of the d-fold product normal rule."""
    z, w = hermite_rule(m)
    if d == 1:
        return z[:, None].copy(), w.copy()
    pts = np.stack(np.meshgrid(*([z] * d), indexing="ij"), axis=-1).reshape(-1, d)
    wts = functools.reduce(np.multiply.outer, [w] * d).reshape(-1)
    return pts, wts


def _contract(values, weights):
    values = np.asarray(values, dtype=float)
    return np.tensordot(weights, values, axes=(0, 0))


def normal_expectation(func, d, m):
    """E[func(X)] for X ~ N(0, I_d) using ``m`` nodes per axis.

    ``func`` maps an ``(N, d)`` array of points to an array whose leading
    axis has length N; trailing axes are preserved in the result.
    """
    pts, wts = tensor_grid(m, d)
    return _contract(func(pts), wts)


def lebesgue_integral(func, d, m, scale=1.0):
    """Integral of ``func`` over R^d for integrands decaying like exp(-|u|^2/(2 scale^2))."""
    pts, wts = tensor_grid(m, d)
    # undo the Gaussian weight: int F = s^d E[F(sZ) / phi_d(Z)]
    jac = scale ** d * (_SQRT_2PI ** d) * np.exp(0.5 * np.sum(pts * pts, axis=1))
    return _contract(func(scale * pts), wts * jac)


def _levels_for(d, levels):
    usable = [m for m in levels if m ** d <= _MAX_POINTS]
    if len(usable) < 2:
        raise NumericalError(f"quadrature levels {levels} too fine for dimension {d}")
    return usable


def adaptive(rule, func, d, tol=1e-8, levels=DEFAULT_LEVELS, **kwargs):
    """Refine ``rule`` over ``levels`` until two successive values agree within ``tol``.

    Agreement is measured in max-abs over all output entries, relative to
    ``max(1, |value|)``.  Returns the finest value computed.
    """
    prev = None
    for m in _levels_for(d, levels):
        cur = np.asarray(rule(func, d, m, **kwargs), dtype=float)
        if prev is not None:
            gap = np.max(np.abs(cur - prev) / np.maximum(1.0, np.abs(cur)), initial=0.0)
            if gap <= tol:
                return cur
        prev = cur
    raise NumericalError(
        f"quadrature did not converge: successive refinements differ by {gap:.3e} > {tol:.1e}"
    )


def expect(func, d, tol=1e-8, levels=DEFAULT_LEVELS):
    """Adaptive standard-normal expectation; see :func:`normal_expectation`."""
    return adaptive(normal_expectation, func, d, tol=tol, levels=levels)


def integrate(func, d, tol=1e-8, scale=1.0, levels=DEFAULT_LEVELS):
    """Adaptive Lebesgue integral; see :func:`lebesgue_integral`."""
    return adaptive(lebesgue_integral, func, d, tol=tol, levels=levels, scale=scale)


def multi_indices(d, order):
    """All multi-indices in Z_+^d whose entries sum to ``order``, in lexicographic order."""
    out = []
    for combo in itertools.combinations_with_replacement(range(d), order):
        a = [0] * d
        for j in combo:
            a[j] += 1
        out.append(tuple(a))
    return sorted(set(out), reverse=True)
