"""Low-order drift-diffusion system for nonlinear diffusion acceleration.

The LO equations are written as an edge-current balance per cell::

    (J[i+1/2] - J[i-1/2]) / dx + removal[i] phi[i] = Q[i]

with interior currents ``J = -D (phi[i+1] - phi[i]) / dx + d_hat (phi[i] + phi[i+1]) / 2``
and boundary currents ``J = r phi`` at the first and last cell. When ``d_hat`` and ``r``
are computed from a high-order solution with the helpers below, that
solution satisfies the LO equations exactly (up to the HO source lag).
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFluxError, SingularSystemError, SolverError

LO_RESIDUAL_TOL = 1e-12


def diffusion_coefficient(xs):
    """Per-cell D = 1 / (3 (sigma_t - sigma~_1 + sigma_tr))."""
    bfp = xs.bfp
    denom = xs.sigma_t - bfp.sigma_tilde_1 + bfp.sigma_tr
    if np.any(denom <= 0.0):
        bad = int(np.argmax(denom <= 0.0))
        raise ValueError(f"non-positive diffusion denominator {denom[bad]:.3e} in cell {bad}")
    return 1.0 / (3.0 * denom)


def edge_diffusion(D):
    """Harmonic mean of adjacent cell diffusion coefficients (interior edges)."""
    D = np.asarray(D, dtype=float)
    return 2.0 * D[1:] * D[:-1] / (D[1:] + D[:-1])


def consistency_factors(phi0_ho, j_ho, D, dx):
    """Drift coefficients d_hat at all I + 1 edges.

    Interior edges get ``(J + D_e (phi[i+1] - phi[i]) / dx) / phi_e`` where
    ``phi_e`` is the mean of the two adjacent cell fluxes. The two boundary
    entries are zero; boundaries are closed with current ratios instead.
    """
    phi = np.asarray(phi0_ho, dtype=float)
    j = np.asarray(j_ho, dtype=float)
    if j.size != phi.size + 1:
        raise ValueError("need one current per edge (I + 1 values)")
    phi_edge = 0.5 * (phi[1:] + phi[:-1])
    zero = np.flatnonzero(phi_edge == 0.0)
    if zero.size:
        edge = int(zero[0]) + 1
        raise DegenerateFluxError(f"edge scalar flux vanishes at edge {edge}", edge=edge)
    d_hat = np.zeros(phi.size + 1)
    d_hat[1:-1] = (j[1:-1] + edge_diffusion(D) * np.diff(phi) / dx) / phi_edge
    return d_hat


def boundary_ratios(flux, quad):
    """Current-to-scalar-flux ratios phi_1 / phi_0 at the two slab faces."""
    ratios = []
    for k, edge in ((0, 0), (-1, flux.edge.shape[0] - 1)):
        psi = flux.edge[k]
        phi0 = psi @ quad.w
        if phi0 == 0.0:
            raise DegenerateFluxError(f"scalar flux vanishes at boundary edge {edge}", edge=edge)
        ratios.append(float(psi @ (quad.w * quad.mu)) / phi0)
    return tuple(ratios)


@dataclass(frozen=True, eq=False)
class TridiagonalSystem:
    """``lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]``.

    ``lower[0]`` and ``upper[-1]`` are unused and kept at zero.
    """

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    rhs: np.ndarray

    def matvec(self, x):
        y = self.diag * x
        y[1:] += self.lower[1:] * x[:-1]
        y[:-1] += self.upper[:-1] * x[1:]
        return y

    def dense(self):
        return np.diag(self.diag) + np.diag(self.lower[1:], -1) + np.diag(self.upper[:-1], 1)

    @property
    def diagonally_dominant(self):
        off = np.abs(self.lower) + np.abs(self.upper)
        return bool(np.all(np.abs(self.diag) >= off))


def assemble_lo(grid, xs, D, d_hat, r_left, r_right, Q):
    """Build the LO tridiagonal system.

    ``r_left`` and ``r_right`` give the boundary current per unit flux in
    the adjacent cell. ``Q`` is the isotropic source per cell.
    """
    I, dx = grid.cells, grid.dx
    D = np.broadcast_to(np.asarray(D, dtype=float), (I,))
    d_hat = np.asarray(d_hat, dtype=float)
    if d_hat.size != I + 1:
        raise ValueError("d_hat needs I + 1 edge values")
    lower = np.zeros(I)
    upper = np.zeros(I)
    diag = np.array(np.broadcast_to(xs.removal, (I,)), dtype=float)
    rhs = np.array(np.broadcast_to(Q, (I,)), dtype=float)
    if I > 1:
        # J[i+1/2] = a phi[i] + b phi[i+1] on interior edges
        De = edge_diffusion(D)
        a = (De / dx + 0.5 * d_hat[1:-1]) / dx
        b = (-De / dx + 0.5 * d_hat[1:-1]) / dx
        diag[:-1] += a
        upper[:-1] = b
        diag[1:] -= b
        lower[1:] = -a
    diag[-1] += r_right / dx
    diag[0] -= r_left / dx
    return TridiagonalSystem(lower, diag, upper, rhs)


def _thomas(lower, diag, upper, rhs):
    n = diag.size
    c = np.empty(n)
    d = np.empty(n)
    pivot = diag[0]
    if pivot == 0.0:
        raise SingularSystemError("zero pivot at row 0", index=0)
    c[0] = upper[0] / pivot
    d[0] = rhs[0] / pivot
    for i in range(1, n):
        pivot = diag[i] - lower[i] * c[i - 1]
        if pivot == 0.0 or not np.isfinite(pivot):
            raise SingularSystemError(f"zero pivot at row {i}", index=i)
        c[i] = upper[i] / pivot
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / pivot
    for i in range(n - 2, -1, -1):
        d[i] -= c[i] * d[i + 1]
    return d


def backward_error(system, x):
    """Normwise relative residual ||A x - b|| / (||A|| ||x|| + ||b||), inf-norms."""
    r = system.matvec(x) - system.rhs
    a_norm = np.max(np.abs(system.lower) + np.abs(system.diag) + np.abs(system.upper))
    scale = a_norm * np.max(np.abs(x)) + np.max(np.abs(system.rhs))
    return float(np.max(np.abs(r)) / scale) if scale > 0.0 else 0.0


def solve_lo(system):
    """Thomas elimination plus one refinement step. Raises on a zero pivot."""
    args = (system.lower, system.diag, system.upper)
    x = _thomas(*args, system.rhs)
    x += _thomas(*args, system.rhs - system.matvec(x))
    rel = backward_error(system, x)
    if not rel <= LO_RESIDUAL_TOL:
        raise SolverError(f"low-order solve residual {rel:.3e}", residual=rel)
    return x


def lo_residual(system, phi):
    """Per-cell residual ``A phi - rhs``."""
    return system.matvec(np.asarray(phi, dtype=float)) - system.rhs
