"""Scattering kernel moments and the Boltzmann-Fokker-Planck decomposition.

Two kernels are provided: Henyey-Greenstein, with moments ``sigma_s * g**l``,
and screened Rutherford, whose moments are integrals of ``C / (1 + 2 eta - mu)**2``
against Legendre polynomials. The decomposition splits a moment sequence into
``B`` smooth moments, a transfer (Fokker-Planck) cross section and a
forward-delta remainder that restores the original moments exactly.
"""

from dataclasses import dataclass

import numpy as np

from .errors import IntegrationError
from .quadrature import legendre_roots, legendre_table

SRK_RELATIVE_TOL = 1e-8
_PANEL_NODES = 48
_CHECK_NODES = 32


@dataclass(frozen=True)
class HGK:
    """Henyey-Greenstein kernel."""

    sigma_s: float = 1.0
    g: float = 0.9

    def __post_init__(self):
        if not 0.0 <= self.g < 1.0:
            raise ValueError(f"g must lie in [0, 1), got {self.g}")
        if self.sigma_s < 0.0:
            raise ValueError("sigma_s must be non-negative")

    @property
    def name(self):
        return "hgk"

    def moments(self, l_max):
        return hgk_moments(self, l_max)


@dataclass(frozen=True)
class SRK:
    """Screened Rutherford kernel.

    With ``normalize`` set the moment vector is rescaled so that its zeroth
    entry equals ``sigma_s``.
    """

    sigma_s: float = 1.0
    C: float = 0.3903
    eta: float = 2.836e-5
    normalize: bool = True

    def __post_init__(self):
        if self.eta <= 0.0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if self.C <= 0.0:
            raise ValueError(f"C must be positive, got {self.C}")
        if self.sigma_s < 0.0:
            raise ValueError("sigma_s must be non-negative")

    @property
    def name(self):
        return "srk"

    def moments(self, l_max):
        return srk_moments(self, l_max)


@dataclass(frozen=True, eq=False)
class KernelMoments:
    """Legendre scattering moments sigma_{s,l}, l = 0..l_max [1/cm]."""

    sigma_s_l: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.sigma_s_l, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "sigma_s_l", arr)

    @property
    def l_max(self):
        return self.sigma_s_l.size - 1


@dataclass(frozen=True, eq=False)
class BfpCoefficients:
    """Result of splitting a kernel into smooth and Fokker-Planck parts.

    Attributes
    ----------
    B : int
        Number of smooth moments kept.
    L : int
        Decomposition order, ``B + 1``.
    sigma_tilde : numpy.ndarray
        Smooth moments for l = 0..B-1.
    sigma_tr : float
        Transfer cross section multiplying the angular Laplacian.
    sigma_s0 : float
        Original zeroth moment (total scattering).
    sigma_sL : float
        Original moment of order L.
    """

    B: int
    L: int
    sigma_tilde: np.ndarray
    sigma_tr: float
    sigma_s0: float
    sigma_sL: float

    def __post_init__(self):
        arr = np.asarray(self.sigma_tilde, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "sigma_tilde", arr)

    @property
    def forward_remainder(self):
        """Coefficient of the forward-delta part, sigma_{s,L} + sigma_tr L(L+1)/2.

        Equals ``sigma_s0 - sigma_tilde[0]``: the isotropic scattering not
        carried by the smooth expansion.
        """
        return self.sigma_sL + 0.5 * self.sigma_tr * self.L * (self.L + 1)

    @property
    def sigma_tilde_1(self):
        """Smooth first moment, zero when only one smooth moment is kept."""
        return float(self.sigma_tilde[1]) if self.B >= 2 else 0.0


def hgk_moments(spec, l_max):
    """sigma_{s,l} = sigma_s * g**l for l = 0..l_max."""
    l = np.arange(l_max + 1)
    # numpy gives 0.0**0 == 1.0, the isotropic convention
    return KernelMoments(spec.sigma_s * np.power(float(spec.g), l))


def _panel_edges(eta):
    upper = 2.0 + 2.0 * eta
    edges = [2.0 * eta]
    while edges[-1] * 4.0 < upper:
        edges.append(edges[-1] * 4.0)
    edges.append(upper)
    return np.asarray(edges)


def _srk_integrals(C, eta, l_max, nodes):
    x, wx = legendre_roots(nodes)
    edges = _panel_edges(eta)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    # t = 1 + 2 eta - mu, graded panels resolve the 1/t**2 peak at t = 2 eta
    t = (half * x + 0.5 * (a + b)).ravel()
    wt = (half * wx).ravel()
    mu = 1.0 + 2.0 * eta - t
    table = legendre_table(l_max, mu)
    return table @ (wt * C / t**2)


def srk_moments(spec, l_max):
    """Screened Rutherford moments by graded-panel Gauss integration.

    Raises
    ------
    IntegrationError
        If two rules of different order disagree by more than 1e-8 relative.
    """
    fine = _srk_integrals(spec.C, spec.eta, l_max, _PANEL_NODES)
    coarse = _srk_integrals(spec.C, spec.eta, l_max, _CHECK_NODES)
    scale = np.abs(fine[0])
    err = np.max(np.abs(fine - coarse)) / scale
    if not np.isfinite(err) or err > SRK_RELATIVE_TOL:
        raise IntegrationError(
            f"SRK moment integration error {err:.3e} exceeds {SRK_RELATIVE_TOL:.0e} "
            f"(eta={spec.eta})"
        )
    moments = spec.sigma_s * fine
    if spec.normalize and moments[0] != 0.0:
        moments = moments * (spec.sigma_s / moments[0])
        moments[0] = spec.sigma_s
    return KernelMoments(moments)


def kernel_moments(spec, l_max):
    """Dispatch on the kernel variant."""
    return spec.moments(l_max)


def bfp_decompose(moments, B):
    """Split moments into B smooth moments plus a Fokker-Planck term.

    With L = B + 1::

        sigma_tr = (s[L-1] - s[L]) / L
        sigma_tilde[l] = s[l] - s[L] - sigma_tr / 2 * (L(L+1) - l(l+1))

    for l = 0..B-1. The formula vanishes identically at l = L-1 and l = L.
    """
    if int(B) != B or B < 1:
        raise ValueError(f"B must be a positive integer, got {B!r}")
    s = moments.sigma_s_l
    L = B + 1
    if L > s.size - 1:
        raise ValueError(
            f"B={B} needs moments through l={L}, only {s.size - 1} available"
        )
    sigma_tr = (s[L - 1] - s[L]) / L
    l = np.arange(B)
    sigma_tilde = s[:B] - s[L] - 0.5 * sigma_tr * (L * (L + 1) - l * (l + 1))
    return BfpCoefficients(
        B=int(B),
        L=int(L),
        sigma_tilde=sigma_tilde,
        sigma_tr=float(sigma_tr),
        sigma_s0=float(s[0]),
        sigma_sL=float(s[L]),
    )
