"""Source iteration, NDA Picard iteration and a dense direct reference.

Both iterative methods converge to the same discrete fixed point: the
diamond-difference, Morel-differenced slab problem in which the scattering
kernel is represented by B smooth moments, a Fokker-Planck term and a
forward remainder. They differ only in what is lagged:

* ``source_iteration`` keeps the FP term in the operator and lags smooth and
  remainder scattering. ``si_scheme="lagged"`` lags the FP term as well; that
  variant is only conditionally stable (large sigma_tr on fine angular grids
  diverges from round-off) and is kept for comparison.
* ``nda_solve`` keeps FP implicit, lags smooth and remainder scattering, and
  replaces the isotropic part of the lagged flux with the LO solution.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .diffusion import (
    assemble_lo,
    boundary_ratios,
    consistency_factors,
    diffusion_coefficient,
    solve_lo,
)
from .errors import SingularSystemError
from .kernels import HGK, bfp_decompose, kernel_moments
from .quadrature import gauss_legendre, legendre_table
from .transport import (
    CrossSections,
    SpatialGrid,
    assemble_ho_operator,
    edge_current,
    edge_scalar_flux,
    ho_solve,
    lagged_source,
    morel_coefficients,
    scalar_flux,
)

SI_SCHEMES = ("lagged", "implicit")
DENSE_LIMIT = 5000


@dataclass(frozen=True)
class ProblemSpec:
    """Everything needed for one slab solve. Defaults follow the HGK benchmark."""

    kernel: object = field(default_factory=HGK)
    B: int = 1
    sigma_a: float = 1e-6
    length: float = 1.0
    cells: int = 200
    quad_order: int = 16
    source_q: float = 1.0
    tol: float = 1e-6
    max_iters: int = 10000
    si_scheme: str = "implicit"

    def __post_init__(self):
        if not self.tol > 0.0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.source_q < 0.0:
            raise ValueError("source_q must be non-negative")
        if self.B < 1:
            raise ValueError("B must be at least 1")
        if self.si_scheme not in SI_SCHEMES:
            raise ValueError(f"si_scheme must be one of {SI_SCHEMES}")

    def replace(self, **changes):
        return type(self)(**{**self.__dict__, **changes})


@dataclass
class Discretization:
    grid: SpatialGrid
    quad: object
    mc: object
    xs: CrossSections
    source: np.ndarray


def discretize(p):
    grid = SpatialGrid(p.length, p.cells)
    quad = gauss_legendre(p.quad_order)
    bfp = bfp_decompose(kernel_moments(p.kernel, p.B + 1), p.B)
    xs = CrossSections.uniform(grid, p.sigma_a, bfp)
    source = np.full(grid.cells, float(p.source_q))
    return Discretization(grid, quad, morel_coefficients(quad), xs, source)


@dataclass
class SolveReport:
    """Outcome of one solve.

    ``phi0`` holds cell scalar fluxes and ``edge_currents`` the I + 1 edge
    currents of the final high-order iterate.
    """

    method: str
    iterations: int
    converged: bool
    error_history: list
    wall_seconds: float
    phi0: np.ndarray
    edge_currents: np.ndarray
    x: np.ndarray
    flux: object = None
    phi0_lo: np.ndarray = None

    @property
    def final_error(self):
        return self.error_history[-1] if self.error_history else float("nan")


def convergence_error(a, b, I=None):
    """(1 / sqrt(I)) * ||a - b||_2."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("convergence_error needs equal-length vectors")
    I = a.size if I is None else I
    return float(np.linalg.norm(a - b) / np.sqrt(I))


def _report(method, d, flux, history, converged, t0, phi0_lo=None):
    return SolveReport(
        method=method,
        iterations=len(history),
        converged=converged,
        error_history=history,
        wall_seconds=time.perf_counter() - t0,
        phi0=scalar_flux(flux, d.quad),
        edge_currents=edge_current(flux, d.quad),
        x=d.grid.nodes,
        flux=flux,
        phi0_lo=phi0_lo,
    )


def source_iteration(p, d=None):
    """Unaccelerated source iteration from a zero initial flux."""
    d = discretize(p) if d is None else d
    implicit = p.si_scheme == "implicit"
    op = assemble_ho_operator(d.grid, d.xs, d.quad, d.mc, fp_implicit=implicit)
    I, N = d.grid.cells, d.quad.order
    external = np.repeat(0.5 * d.source[:, None], N, axis=1)

    t0 = time.perf_counter()
    psi = np.zeros((I, N))
    phi_old = np.zeros(I)
    history = []
    converged = False
    flux = None
    while len(history) < p.max_iters:
        emission = lagged_source(psi, d.xs, d.quad, d.mc, include_fp=not implicit) + external
        flux = ho_solve(op, emission)
        psi = flux.cell
        phi = psi @ d.quad.w
        history.append(convergence_error(phi, phi_old, I))
        phi_old = phi
        if history[-1] <= p.tol:
            converged = True
            break
    return _report("SI", d, flux, history, converged, t0)


def nda_boundary_coefficients(flux, quad):
    """Boundary current per unit adjacent-cell flux, from HO edge ratios.

    The HO current-to-flux ratio at each face is rescaled by the ratio of the
    HO face flux to the HO flux of the adjacent cell. The LO boundary current
    ``J = r phi_cell`` then reproduces the HO current when phi = phi_HO.
    """
    r_left, r_right = boundary_ratios(flux, quad)
    face = edge_scalar_flux(flux, quad)
    cell = scalar_flux(flux, quad)
    return r_left * face[0] / cell[0], r_right * face[-1] / cell[-1]


def nda_solve(p, d=None):
    """Nonlinear diffusion acceleration with Picard iteration."""
    d = discretize(p) if d is None else d
    op = assemble_ho_operator(d.grid, d.xs, d.quad, d.mc, fp_implicit=True)
    I, N = d.grid.cells, d.quad.order
    external = np.repeat(0.5 * d.source[:, None], N, axis=1)
    D = diffusion_coefficient(d.xs)

    t0 = time.perf_counter()
    flux = ho_solve(op, external)
    phi_lo = scalar_flux(flux, d.quad)
    history = []
    converged = False
    while len(history) < p.max_iters:
        emission = lagged_source(flux.cell, d.xs, d.quad, d.mc, include_fp=False, phi0=phi_lo)
        flux = ho_solve(op, emission + external)
        phi_ho = scalar_flux(flux, d.quad)
        history.append(convergence_error(phi_ho, phi_lo, I))
        if history[-1] <= p.tol:
            converged = True
            break
        d_hat = consistency_factors(phi_ho, edge_current(flux, d.quad), D, d.grid.dx)
        r_left, r_right = nda_boundary_coefficients(flux, d.quad)
        system = assemble_lo(d.grid, d.xs, D, d_hat, r_left, r_right, d.source)
        phi_lo = solve_lo(system)
    return _report("NDA", d, flux, history, converged, t0, phi0_lo=phi_lo)


def dense_reference_solve(p, d=None):
    """Direct solve of the full discrete problem with all scattering implicit.

    Assembled densely from the definitions, independent of the sparse
    operator and the iteration drivers. Limited to I*N <= 5000.
    """
    d = discretize(p) if d is None else d
    I, N = d.grid.cells, d.quad.order
    if I * N > DENSE_LIMIT:
        raise ValueError(f"dense reference limited to {DENSE_LIMIT} unknowns, got {I * N}")
    mu, w, gamma = d.quad.mu, d.quad.w, d.mc.gamma
    bfp = d.xs.bfp
    dx = d.grid.dx

    # per-cell angular coupling: collision - FP - scattering, acting on psi_bar
    fp = np.zeros((N, N))
    for n in range(N):
        if n + 1 < N:
            g = gamma[n + 1] / (mu[n + 1] - mu[n]) / w[n]
            fp[n, n + 1] += g
            fp[n, n] -= g
        if n > 0:
            g = gamma[n] / (mu[n] - mu[n - 1]) / w[n]
            fp[n, n - 1] += g
            fp[n, n] -= g
    P = legendre_table(bfp.B - 1, mu)
    scat = np.zeros((N, N))
    for l in range(bfp.B):
        scat += (2 * l + 1) / 2 * bfp.sigma_tilde[l] * np.outer(P[l], P[l] * w)
    scat += bfp.forward_remainder * np.eye(N)

    size = (I + 1) * N
    A = np.zeros((size, size))
    b = np.zeros(size)
    for i in range(I):
        coll = d.xs.sigma_t[i] * np.eye(N) - 0.5 * bfp.sigma_tr * fp - scat
        rows = slice(i * N, (i + 1) * N)
        A[rows, i * N:(i + 1) * N] = -np.diag(mu) / dx + 0.5 * coll
        A[rows, (i + 1) * N:(i + 2) * N] = np.diag(mu) / dx + 0.5 * coll
        b[rows] = 0.5 * d.source[i]
    for n in range(N):
        A[I * N + n, (n if mu[n] > 0 else I * N + n)] = 1.0
    try:
        edge = np.linalg.solve(A, b).reshape(I + 1, N)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"dense reference system is singular: {exc}") from exc
    return 0.5 * (edge[1:] + edge[:-1]) @ w
