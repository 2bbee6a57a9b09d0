"""High-order slab transport operator with a Fokker-Planck angular term.

Space is diamond-differenced and angle uses discrete ordinates. The angular
Laplacian uses Morel's weighted finite difference, which conserves particles
and annihilates constants exactly.

The discrete unknowns are the edge angular fluxes ``psi[i, n]`` for
``i = 0..I`` and ``n = 0..N-1``. Cell averages follow from the diamond
closure ``psi_bar = (psi[i] + psi[i+1]) / 2``. One balance row per cell and
direction plus one inflow row per direction gives a square sparse system,
factored once and reused for every solve with the same operator.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SingularSystemError, SolverError
from .quadrature import legendre_table

HO_RESIDUAL_TOL = 1e-12


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform slab grid of ``cells`` cells on ``[0, length]`` (cm)."""

    length: float
    cells: int

    def __post_init__(self):
        if self.cells < 1:
            raise ValueError("need at least one cell")
        if not self.length > 0.0:
            raise ValueError("slab length must be positive")

    @property
    def dx(self):
        return self.length / self.cells

    @property
    def nodes(self):
        """Cell-center positions."""
        return (np.arange(self.cells) + 0.5) * self.dx

    @property
    def edges(self):
        return np.linspace(0.0, self.length, self.cells + 1)


@dataclass(frozen=True, eq=False)
class CrossSections:
    """Per-cell absorption plus a uniform decomposed scattering kernel.

    The total is ``sigma_a + sigma_{s,0}``: the original zeroth scattering
    moment, so that smooth, Fokker-Planck and forward-remainder scattering
    together conserve particles.
    """

    sigma_a: np.ndarray
    bfp: object

    def __post_init__(self):
        arr = np.array(self.sigma_a, dtype=float, ndmin=1)
        arr.setflags(write=False)
        object.__setattr__(self, "sigma_a", arr)
        if np.any(self.sigma_t <= 0.0):
            raise ValueError("total cross section must be positive in every cell")

    @classmethod
    def uniform(cls, grid, sigma_a, bfp):
        return cls(np.full(grid.cells, float(sigma_a)), bfp)

    @property
    def sigma_t(self):
        return self.sigma_a + self.bfp.sigma_s0

    @property
    def removal(self):
        """Net removal seen by the scalar flux balance."""
        return self.sigma_t - self.bfp.sigma_s0


@dataclass(frozen=True, eq=False)
class MorelCoefficients:
    """Edge coefficients gamma_{n+1/2}, n = 0..N (N + 1 values)."""

    gamma: np.ndarray
    nu: float


@dataclass(frozen=True, eq=False)
class AngularFlux:
    """Cell-average ``(I, N)`` and edge ``(I + 1, N)`` angular fluxes."""

    cell: np.ndarray
    edge: np.ndarray


def morel_coefficients(quad, nu=-2.0):
    """gamma_{1/2} = 0, gamma_{n+1/2} = gamma_{n-1/2} + nu mu_n w_n.

    The last coefficient telescopes to zero on a symmetric set and is pinned
    to exactly zero.
    """
    gamma = np.zeros(quad.order + 1)
    gamma[1:] = np.cumsum(nu * quad.mu * quad.w)
    if abs(gamma[-1]) > 1e-12:
        raise ValueError("quadrature is not symmetric: gamma_{N+1/2} != 0")
    gamma[-1] = 0.0
    return MorelCoefficients(gamma, nu)


def _fp_couplings(quad, mc):
    """Forward and backward coupling strengths a+_n, a-_n of the FP stencil."""
    dmu = np.diff(quad.mu)
    inner = mc.gamma[1:-1] / dmu
    a_plus = np.append(inner, 0.0)
    a_minus = np.insert(inner, 0, 0.0)
    return a_plus, a_minus


def fp_matrix(quad, mc):
    """Dense N x N matrix of the discrete angular Laplacian."""
    a_plus, a_minus = _fp_couplings(quad, mc)
    m = np.diag(-(a_plus + a_minus)) + np.diag(a_plus[:-1], 1) + np.diag(a_minus[1:], -1)
    return m / quad.w[:, None]


def apply_fp(psi, quad, mc):
    """Discrete d/dmu (1 - mu^2) d/dmu applied along the last axis.

    ``out_n = (gamma_{n+1/2} dpsi_{n+1/2} - gamma_{n-1/2} dpsi_{n-1/2}) / w_n``
    with ``dpsi_{n+1/2} = (psi_{n+1} - psi_n) / (mu_{n+1} - mu_n)``.
    """
    psi = np.asarray(psi, dtype=float)
    flux = np.zeros(psi.shape[:-1] + (quad.order + 1,))
    flux[..., 1:-1] = mc.gamma[1:-1] * np.diff(psi, axis=-1) / np.diff(quad.mu)
    return np.diff(flux, axis=-1) / quad.w


class HOOperator:
    """Factored high-order operator for one grid, medium and quadrature."""

    def __init__(self, matrix, grid, quad, fp_implicit):
        self.matrix = matrix.tocsc()
        self.grid = grid
        self.quad = quad
        self.fp_implicit = fp_implicit
        self._norm = spla.norm(self.matrix, np.inf)
        try:
            self._lu = spla.splu(self.matrix)
        except RuntimeError as exc:
            raise SingularSystemError(f"high-order operator is singular: {exc}") from exc

    @property
    def shape(self):
        return self.grid.cells, self.quad.order

    def rhs(self, emission, inflow=None):
        I, N = self.shape
        emission = np.asarray(emission, dtype=float)
        if emission.shape != (I, N):
            raise ValueError(f"emission must have shape {(I, N)}, got {emission.shape}")
        bc = np.zeros(N) if inflow is None else np.asarray(inflow, dtype=float)
        return np.concatenate([emission.ravel(), bc])

    def backward_error(self, x, b):
        """Normwise relative residual ||A x - b|| / (||A|| ||x|| + ||b||), inf-norms."""
        r = b - self.matrix @ x
        scale = self._norm * np.max(np.abs(x)) + np.max(np.abs(b))
        return float(np.max(np.abs(r)) / scale) if scale > 0.0 else 0.0

    def solve_edges(self, b):
        x = self._lu.solve(b)
        rel = self.backward_error(x, b)
        if rel > HO_RESIDUAL_TOL:
            x = x + self._lu.solve(b - self.matrix @ x)
            rel = self.backward_error(x, b)
        if not rel <= HO_RESIDUAL_TOL:
            raise SolverError(f"high-order solve residual {rel:.3e}", residual=rel)
        return x, rel


def assemble_ho_operator(grid, xs, quad, mc, fp_implicit=True):
    """Sparse system for streaming + removal (- sigma_tr/2 FP) with vacuum inflow.

    Rows ``i*N + n`` hold the cell balance::

        mu_n (psi[i+1,n] - psi[i,n]) / dx + sigma_t psi_bar[i,n]
            - sigma_tr/2 FP(psi_bar[i])_n = q[i,n]

    and rows ``I*N + n`` fix the incoming edge flux of direction n. With
    ``fp_implicit=False`` the FP term is left out of the operator so that a
    caller can lag it in the source.
    """
    I, N = grid.cells, quad.order
    dx = grid.dx
    sigma_t = xs.sigma_t
    cell = np.repeat(np.arange(I), N)
    ang = np.tile(np.arange(N), I)
    row = cell * N + ang
    mu = quad.mu[ang]
    st = sigma_t[cell]

    rows = [row, row]
    cols = [(cell + 1) * N + ang, cell * N + ang]
    vals = [mu / dx + 0.5 * st, -mu / dx + 0.5 * st]

    if fp_implicit and xs.bfp.sigma_tr != 0.0:
        a_plus, a_minus = _fp_couplings(quad, mc)
        scale = -0.5 * xs.bfp.sigma_tr / quad.w
        # coefficient on psi_bar[i, n + shift]
        for shift, coef in ((1, a_plus), (0, -(a_plus + a_minus)), (-1, a_minus)):
            c = (scale * coef)[ang]
            keep = (c != 0.0) & (ang + shift >= 0) & (ang + shift < N)
            for e in (0, 1):  # psi_bar is the mean of the two bounding edges
                rows.append(row[keep])
                cols.append((cell[keep] + e) * N + ang[keep] + shift)
                vals.append(0.5 * c[keep])

    bc_rows = I * N + np.arange(N)
    bc_cols = np.where(quad.mu > 0.0, np.arange(N), I * N + np.arange(N))
    rows.append(bc_rows)
    cols.append(bc_cols)
    vals.append(np.ones(N))

    size = (I + 1) * N
    matrix = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(size, size),
    )
    return HOOperator(matrix, grid, quad, fp_implicit)


def ho_solve(operator, emission, inflow=None):
    """Solve the high-order system for a given per-cell, per-angle emission.

    ``inflow`` optionally gives the incoming boundary flux per direction
    (entry n is used at x = 0 if mu_n > 0, else at x = L); vacuum by default.
    """
    I, N = operator.shape
    x, _ = operator.solve_edges(operator.rhs(emission, inflow))
    edge = x.reshape(I + 1, N)
    cell = 0.5 * (edge[1:] + edge[:-1])
    return AngularFlux(cell=cell, edge=edge)


def scattering_source(moments, bfp, quad):
    """Smooth scattering emission sum_l (2l+1)/2 P_l(mu_n) sigma~_l phi_l.

    ``moments`` has shape ``(B, I)`` (extra rows are ignored); returns ``(I, N)``.
    """
    moments = np.atleast_2d(np.asarray(moments, dtype=float))
    B = bfp.B
    if moments.shape[0] < B:
        raise ValueError(f"need {B} flux moments, got {moments.shape[0]}")
    l = np.arange(B)
    kernel = ((2 * l + 1) / 2 * bfp.sigma_tilde)[:, None] * legendre_table(B - 1, quad.mu)
    return moments[:B].T @ kernel


def lagged_source(psi_cell, xs, quad, mc, include_fp, phi0=None):
    """Scattering emission built from a previous angular flux iterate.

    Always includes the smooth expansion and the forward remainder
    ``(sigma_s0 - sigma~_0) psi``; includes ``sigma_tr/2 FP(psi)`` when
    ``include_fp``. If ``phi0`` is given, the isotropic component of the
    iterate is replaced by ``phi0`` while all higher moments are kept.
    """
    bfp = xs.bfp
    psi = np.asarray(psi_cell, dtype=float)
    moments = project_cell_moments(psi, quad, max(bfp.B - 1, 0))
    if phi0 is not None:
        shift = 0.5 * (np.asarray(phi0) - moments[0])
        psi = psi + shift[:, None]
        moments[0] = phi0
    src = scattering_source(moments, bfp, quad) + bfp.forward_remainder * psi
    if include_fp and bfp.sigma_tr != 0.0:
        src = src + 0.5 * bfp.sigma_tr * apply_fp(psi, quad, mc)
    return src


def project_cell_moments(psi_cell, quad, l_max):
    """Moments ``(l_max + 1, I)`` of a cell angular flux ``(I, N)``."""
    weighted = legendre_table(l_max, quad.mu) * quad.w
    return weighted @ np.asarray(psi_cell, dtype=float).T


def scalar_flux(flux, quad):
    """Cell-average scalar flux phi_0."""
    return flux.cell @ quad.w


def edge_current(flux, quad):
    """phi_1 at each of the I + 1 edges."""
    return flux.edge @ (quad.w * quad.mu)


def edge_scalar_flux(flux, quad):
    return flux.edge @ quad.w
