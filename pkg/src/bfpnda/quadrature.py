"""Gauss-Legendre angular quadrature and Legendre moment projection."""

from dataclasses import dataclass

import numpy as np

_ROOT_TOL = 1e-15
_MAX_NEWTON = 100


@dataclass(frozen=True, eq=False)
class Quadrature:
    """Symmetric angular quadrature on [-1, 1].

    Attributes
    ----------
    order : int
        Number of discrete directions N.
    mu : numpy.ndarray
        Direction cosines, strictly ascending.
    w : numpy.ndarray
        Positive weights summing to 2.
    """

    order: int
    mu: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        w = np.asarray(self.w, dtype=float)
        if mu.shape != (self.order,) or w.shape != (self.order,):
            raise ValueError("mu and w must both have length order")
        mu.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "w", w)

    @property
    def positive(self):
        """Boolean mask of directions with mu > 0."""
        return self.mu > 0.0


def legendre_eval(l, x):
    """Evaluate P_l(x) with the Bonnet recurrence.

    Works elementwise on arrays.
    """
    if l < 0:
        raise ValueError("Legendre degree must be non-negative")
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    if l == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    p = x.copy()
    for k in range(1, l):
        p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
    return p if p.ndim else float(p)


def legendre_table(l_max, x):
    """Rows P_0(x) .. P_{l_max}(x), shape ``(l_max + 1, len(x))``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    table = np.empty((l_max + 1, x.size))
    table[0] = 1.0
    if l_max >= 1:
        table[1] = x
    for k in range(1, l_max):
        table[k + 1] = ((2 * k + 1) * x * table[k] - k * table[k - 1]) / (k + 1)
    return table


def _legendre_and_derivative(n, x):
    p_prev, p = 1.0, x
    for k in range(1, n):
        p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
    dp = n * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


def legendre_roots(n):
    """Roots and Gauss weights of P_n in ascending order, for any n >= 1."""
    if n < 1:
        raise ValueError("need n >= 1")
    mu = np.empty(n)
    w = np.empty(n)
    # roots come in +/- pairs; solve for the positive half and mirror
    for k in range(1, n // 2 + 1):
        x = np.cos(np.pi * (k - 0.25) / (n + 0.5))
        for _ in range(_MAX_NEWTON):
            p, dp = _legendre_and_derivative(n, x)
            step = p / dp
            x -= step
            if abs(step) < 1e-16 or abs(p) <= _ROOT_TOL:
                break
        p, dp = _legendre_and_derivative(n, x)
        wk = 2.0 / ((1.0 - x * x) * dp * dp)
        mu[n - k], mu[k - 1] = x, -x
        w[n - k], w[k - 1] = wk, wk
    if n % 2:
        # P_n'(0) for odd n from the recurrence at x = 0
        _, dp = _legendre_and_derivative(n, 0.0) if n > 1 else (0.0, 1.0)
        mu[n // 2] = 0.0
        w[n // 2] = 2.0 / dp**2
    return mu, w


def gauss_legendre(order):
    """Gauss-Legendre set with ``order`` directions (must be even, >= 2)."""
    if int(order) != order or order < 2 or order % 2:
        raise ValueError(f"quadrature order must be an even integer >= 2, got {order!r}")
    mu, w = legendre_roots(int(order))
    return Quadrature(int(order), mu, w)


def project_moments(psi, quad, l_max):
    """Legendre moments phi_l = sum_n w_n P_l(mu_n) psi_n for l = 0..l_max.

    ``psi`` may carry leading axes (e.g. cells); the last axis is angle.
    The result has the moment index first: shape ``(l_max + 1, ...)``.
    """
    psi = np.asarray(psi, dtype=float)
    if psi.shape[-1] != quad.order:
        raise ValueError("last axis of psi must match the quadrature order")
    weighted = legendre_table(l_max, quad.mu) * quad.w
    return np.moveaxis(psi @ weighted.T, -1, 0)
