"""Eikonal scattering of a gas atom off an oriented molecule.

The interaction is the homogeneous anisotropic potential

    V(r, cos Theta) = -C / r**s * (1 + a cos(Theta)**2),

Theta being the angle between the molecular axis m and the atom position.
Closed-form orientation-averaged cross sections live next to brute-force
quadrature oracles (eikonal phase, impact-plane amplitude, angular
averages) that check them.

Momenta ``p`` are relative momenta in kg m/s; ``m`` is the gas-atom mass,
which stands in for the reduced mass because the molecule is much heavier.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special

from .numerics import (
    DEFAULT_SPEC,
    QuadratureSpec,
    UnconvergedWarning,
    composite_gauss_legendre,
    gauss_legendre,
    quadrature_1d,
    sphere_average,
)
from .units import EPSILON0, HBAR

__all__ = [
    "InteractionPotential",
    "CrossSectionBundle",
    "dipole_induced_dipole",
    "phase_strength",
    "orientation_bracket",
    "sigma0",
    "sigma_tot_closed",
    "sigma_tot_numeric",
    "orientation_enhancement",
    "potential",
    "eikonal_phase_closed",
    "eikonal_phase_quadrature",
    "eikonal_amplitude_numeric",
    "sigma_tot_optical",
    "diff_xsec_params",
    "diff_xsec_gaussian",
    "cross_sections",
    "anisotropy_factors",
    "angular_approx_error",
]

# window of the closed-form angular approximations
A_MAX = 3.0


@dataclass(frozen=True)
class InteractionPotential:
    """Parameters (C, s, a) of the homogeneous anisotropic potential.

    ``C`` in J m**s, ``s`` the homogeneity exponent, ``a >= 0`` the
    anisotropy. ``s > 3`` is required for a finite total cross section;
    differential-cross-section features additionally need ``s > 5``.
    """

    C: float
    s: float
    a: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.C) and self.C > 0):
            raise ValueError(f"InteractionPotential: C must be > 0, got {self.C!r}")
        if not (math.isfinite(self.s) and self.s > 3):
            raise ValueError(
                f"InteractionPotential: s must be > 3 (Gamma((s-3)/(s-1)) > 0), got {self.s!r}"
            )
        if not (math.isfinite(self.a) and self.a >= 0):
            raise ValueError(f"InteractionPotential: a must be >= 0, got {self.a!r}")

    @property
    def in_angular_window(self) -> bool:
        """Whether the closed-form angular averages are claimed accurate (a <= 3)."""
        return self.a <= A_MAX

    def require_differential(self):
        if not self.s > 5:
            raise ValueError(
                f"differential cross section needs s > 5 so that Gamma((s-5)/(s-1)) "
                f"has a positive argument; got s = {self.s}"
            )


@dataclass(frozen=True)
class CrossSectionBundle:
    """Cross sections at one momentum (SI units)."""

    p: float
    sigma0: float
    sigma_tot_avg: float
    A: float
    theta_star: float


def dipole_induced_dipole(alpha0: float, d0: float) -> InteractionPotential:
    """Dipole-induced-dipole potential: s = 6, a = 3, C = alpha0 d0^2 / (32 pi^2 eps0^2).

    ``alpha0`` is the SI polarizability of the atom, ``d0`` the molecular
    dipole in C m. A vanishing dipole gives C = 0, which is refused.
    """
    if not alpha0 > 0:
        raise ValueError("alpha0 must be positive")
    if d0 < 0:
        raise ValueError("d0 must be >= 0")
    C = alpha0 * d0**2 / (32.0 * math.pi**2 * EPSILON0**2)
    return InteractionPotential(C=C, s=6.0, a=3.0)


def phase_strength(p: float, pot: InteractionPotential, m: float) -> float:
    """Coefficient of the isotropic eikonal phase, phase = strength / b**(s-1)."""
    s = pot.s
    return (
        math.sqrt(math.pi) * m * pot.C / (HBAR * p)
        * math.exp(special.gammaln((s - 1) / 2) - special.gammaln(s / 2))
    )


def orientation_bracket(beta, dphi, a: float, s: float):
    """1 + (a/s) cos^2(beta) + (a (s-1)/s) sin^2(beta) cos^2(dphi).

    The angular factor of the straight-line integral of the potential for
    impact-vector azimuth ``dphi`` measured from the projected axis.
    """
    cb = np.cos(beta)
    sb = np.sin(beta)
    return 1.0 + (a / s) * cb * cb + (a * (s - 1) / s) * sb * sb * np.cos(dphi) ** 2


def _check_p(p):
    if not p > 0:
        raise ValueError(f"momentum must be positive, got {p!r}")


def sigma0(p: float, pot: InteractionPotential, m: float) -> float:
    """Total cross section of the isotropic part of the potential, m^2."""
    _check_p(p)
    s = pot.s
    g = (s - 3) / (s - 1)
    return (
        2 * math.pi * math.sin(0.5 * math.pi * g) * special.gamma(g)
        * phase_strength(p, pot, m) ** (2 / (s - 1))
    )


def sigma_tot_closed(p: float, pot: InteractionPotential, m: float) -> float:
    """Orientation-averaged total cross section, sigma0 * (1 + a/3)**(2/(s-1))."""
    return sigma0(p, pot, m) * (1 + pot.a / 3) ** (2 / (pot.s - 1))


def orientation_enhancement(
    a: float,
    s: float,
    spec: QuadratureSpec = DEFAULT_SPEC,
    transverse_angle: float = 0.0,
):
    """Sphere average of the bracket**(2/(s-1)), i.e. <sigma_tot>/sigma0.

    ``transverse_angle`` rotates the transverse reference axis about the beam
    axis; the average must not depend on it.
    """
    ex = (math.cos(transverse_angle), math.sin(transverse_angle))

    def g(beta, alpha):
        mz = np.cos(beta)
        mx = np.sin(beta) * (np.cos(alpha) * ex[0] + np.sin(alpha) * ex[1])
        return (1 + (a / s) * mz**2 + (a * (s - 1) / s) * mx**2) ** (2 / (s - 1))

    return sphere_average(g, spec)


def sigma_tot_numeric(
    p: float, pot: InteractionPotential, m: float, spec: QuadratureSpec = DEFAULT_SPEC
) -> float:
    """sigma0 times the quadrature-converged orientational average."""
    return sigma0(p, pot, m) * orientation_enhancement(pot.a, pot.s, spec).value


# --------------------------------------------------------------------------
# eikonal phase


def _axis(beta, alpha):
    return np.array(
        [math.sin(beta) * math.cos(alpha), math.sin(beta) * math.sin(alpha), math.cos(beta)]
    )


def potential(r_vec, m_vec, pot: InteractionPotential):
    """V at atom position ``r_vec`` (last axis = xyz) for molecular axis ``m_vec``."""
    r_vec = np.asarray(r_vec, dtype=float)
    r = np.linalg.norm(r_vec, axis=-1)
    cos_t = (r_vec @ np.asarray(m_vec, dtype=float)) / r
    return -pot.C / r**pot.s * (1 + pot.a * cos_t**2)


def eikonal_phase_closed(b, varphi, beta, pot: InteractionPotential, m: float, p: float, alpha=0.0):
    """Eikonal phase -(m/hbar p) * integral dz V along the straight line at impact vector b.

    ``varphi`` is the azimuth of the impact vector, (beta, alpha) the
    orientation of the molecular axis, beam along z.
    """
    b = np.asarray(b, dtype=float)
    if np.any(b <= 0):
        raise ValueError("impact parameter must be positive")
    strength = phase_strength(p, pot, m)
    return strength / b ** (pot.s - 1) * orientation_bracket(beta, np.asarray(varphi) - alpha, pot.a, pot.s)


def eikonal_phase_quadrature(
    b: float, varphi: float, beta: float, pot: InteractionPotential, m: float, p: float,
    alpha: float = 0.0, spec: QuadratureSpec = DEFAULT_SPEC,
) -> float:
    """Oracle: the straight-line integral of V done by adaptive quadrature."""
    if not b > 0:
        raise ValueError("impact parameter must be positive")
    mv = _axis(beta, alpha)
    bv = np.array([math.cos(varphi), math.sin(varphi), 0.0])

    # z = b t; V = -C/b^s * (1+t^2)^(-s/2) (1 + a cos^2)
    def integrand(t):
        r2 = 1.0 + t * t
        cos_t = (bv @ mv + t * mv[2]) / math.sqrt(r2)
        return r2 ** (-pot.s / 2) * (1.0 + pot.a * cos_t * cos_t)

    dimless = (
        quadrature_1d(integrand, 0.0, np.inf, spec).value
        + quadrature_1d(lambda t: integrand(-t), 0.0, np.inf, spec).value
    )
    line_integral = -pot.C / b ** (pot.s - 1) * dimless
    return -m / (HBAR * p) * line_integral


# --------------------------------------------------------------------------
# eikonal amplitude by impact-plane quadrature


def _phase_nodes(chi_lo: float, chi_sw: float, chi_hi: float, n_log: int, per_period: int):
    # log-spaced below chi_sw, panels of half a period above
    u, wu = gauss_legendre(math.log(chi_lo), math.log(chi_sw), n_log)
    c1 = np.exp(u)
    w1 = wu * c1
    npan = max(1, math.ceil((chi_hi - chi_sw) / math.pi))
    c2, w2 = composite_gauss_legendre(np.linspace(chi_sw, chi_hi, npan + 1), per_period)
    return np.concatenate([c1, c2]), np.concatenate([w1, w2])


def _amplitude(p, theta, phi, beta, alpha, pot, m, n_azimuth, chi_bounds):
    """Impact-plane integral for an array of polar angles ``beta``."""
    s = pot.s
    k = p / HBAR
    kt = k * math.sin(theta)
    chi_lo, chi_hi = chi_bounds
    chi, wchi = _phase_nodes(chi_lo, 1.0, chi_hi, 96, 16)
    vphi = 2 * math.pi * np.arange(n_azimuth) / n_azimuth
    beta = np.atleast_1d(np.asarray(beta, dtype=float))

    strength = phase_strength(p, pot, m)
    # A(beta, varphi): shape (nb, nphi)
    A = strength * orientation_bracket(beta[:, None], vphi[None, :] - alpha, pot.a, s)
    proj = np.cos(vphi - phi)[None, :]

    total = np.zeros(len(beta), dtype=complex)
    for i in range(len(beta)):
        Ai = A[i][:, None]
        b = (Ai / chi[None, :]) ** (1 / (s - 1))
        jac = b * b / ((s - 1) * chi[None, :])  # b db = jac dchi
        four = np.exp(-1j * kt * b * proj[0][:, None])
        body = np.sum(wchi * jac * four * (np.exp(1j * chi) - 1.0), axis=1)
        # b < b_min: the phase factor oscillates away, leaving -1, plus the
        # boundary terms of integrating exp(i chi) g(chi) from chi_hi to infinity
        b_min = (A[i] / chi_hi) ** (1 / (s - 1))
        g_hi = b_min**2 / ((s - 1) * chi_hi) * np.exp(-1j * kt * b_min * proj[0])
        dg_hi = -(1 + 2 / (s - 1)) * g_hi / chi_hi
        inner = -0.5 * b_min**2 + 1j * np.exp(1j * chi_hi) * g_hi - np.exp(1j * chi_hi) * dg_hi
        # b > b_max: exp(i chi) - 1 ~ i chi
        b_max = (A[i] / chi_lo) ** (1 / (s - 1))
        outer = 1j * A[i] * b_max ** (3 - s) / (s - 3)
        total[i] = np.mean(body + inner + outer) * 2 * math.pi
    return -1j * p / (2 * math.pi * HBAR) * total


def eikonal_amplitude_numeric(
    p: float,
    theta: float,
    phi: float,
    beta,
    alpha: float,
    pot: InteractionPotential,
    m: float,
    n_azimuth: int = 64,
    chi_bounds: tuple[float, float] = (1e-6, 1e3),
    rel_tol: float = 1e-4,
):
    """Orientation-dependent eikonal amplitude f(p, n'; m) in metres.

    Direct quadrature over the impact plane: trapezoid rule in the impact
    azimuth and, along each ray, Gauss-Legendre in the eikonal phase chi
    itself (log-spaced for chi < 1, half-period panels up to chi_hi). Impact
    parameters with phase above ``chi_hi`` are replaced by the averaged
    plateau, those with phase below ``chi_lo`` by the linearised tail.

    Only small angles are supported (theta <= pi/6). ``beta`` may be an
    array. The azimuth count is doubled once to check ``rel_tol``.
    """
    _check_p(p)
    if not 0 <= theta <= math.pi / 6:
        raise ValueError("eikonal amplitude oracle is restricted to 0 <= theta <= pi/6")
    f1 = _amplitude(p, theta, phi, beta, alpha, pot, m, n_azimuth, chi_bounds)
    f2 = _amplitude(p, theta, phi, beta, alpha, pot, m, 2 * n_azimuth, chi_bounds)
    err = np.max(np.abs(f2 - f1) / np.maximum(np.abs(f2), 1e-300))
    if err > rel_tol:
        warnings.warn(f"eikonal_amplitude_numeric: azimuth rule not converged ({err:.2e})", UnconvergedWarning)
    return f2[0] if np.ndim(beta) == 0 else f2


def sigma_tot_optical(
    p: float, pot: InteractionPotential, m: float, spec: QuadratureSpec = QuadratureSpec(rel_tol=1e-6)
):
    """Orientation-averaged total cross section from the forward amplitude.

    Optical theorem (4 pi hbar / p) Im f(forward; m), averaged over the
    molecular axis with :func:`sphere_average`.
    """
    cache = {}

    def g(beta, alpha):
        # forward amplitude does not depend on alpha
        key = beta.tobytes()
        if key not in cache:
            f = eikonal_amplitude_numeric(p, 0.0, 0.0, beta[:, 0], 0.0, pot, m, n_azimuth=32)
            cache[key] = (4 * math.pi * HBAR / p * f.imag)[:, None]
        return cache[key] + 0.0 * alpha

    return sphere_average(g, spec, n_start=8, n_max=128)


# --------------------------------------------------------------------------
# differential cross section


def diff_xsec_params(p: float, pot: InteractionPotential, m: float) -> tuple[float, float]:
    """Forward value A (m^2/sr) and width theta_* (rad) of the averaged differential cross section."""
    pot.require_differential()
    s = pot.s
    st = sigma_tot_closed(p, pot, m)
    A = (p * st / (4 * math.pi * HBAR * math.cos(math.pi / (s - 1)))) ** 2
    theta_star = (
        HBAR / p * math.sqrt(8 * math.pi / st)
        * special.gamma((s - 3) / (s - 1)) / math.sqrt(special.gamma((s - 5) / (s - 1)))
    )
    return A, theta_star


def diff_xsec_gaussian(p: float, theta, pot: InteractionPotential, m: float):
    """Gaussian model A exp(-(theta/theta_*)^2) of the averaged differential cross section.

    A model for soft collisions; the hard-scattering power-law tail is not
    represented.
    """
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0):
        raise ValueError("theta must be >= 0")
    A, ts = diff_xsec_params(p, pot, m)
    out = A * np.exp(-((theta / ts) ** 2))
    return out[()] if out.ndim == 0 else out


def cross_sections(p: float, pot: InteractionPotential, m: float) -> CrossSectionBundle:
    A, ts = diff_xsec_params(p, pot, m)
    return CrossSectionBundle(
        p=p, sigma0=sigma0(p, pot, m), sigma_tot_avg=sigma_tot_closed(p, pot, m), A=A, theta_star=ts
    )


# --------------------------------------------------------------------------
# angular factors


def anisotropy_factors(
    a: float, s: float, mode: str = "numeric", spec: QuadratureSpec = DEFAULT_SPEC
) -> tuple[float, float]:
    """The angular factors (h1, h2) entering A and theta_*.

    ``mode="closed"`` returns (1 + a/3)^(4/(s-1)) and (1 + a/3)^(2/(s-1));
    ``mode="numeric"`` integrates the azimuthal averages of G and G^2 over
    the orientation sphere. h2 is normalised so that h2(a=0) = 1.
    """
    if not 0 <= a <= A_MAX:
        raise ValueError(f"a must lie in [0, {A_MAX}], got {a}")
    if mode == "closed":
        return (1 + a / 3) ** (4 / (s - 1)), (1 + a / 3) ** (2 / (s - 1))
    if mode != "numeric":
        raise ValueError(f"mode must be 'numeric' or 'closed', got {mode!r}")

    vphi = 2 * math.pi * np.arange(256) / 256

    def moments(beta):
        G = orientation_bracket(beta[..., None], vphi, a, s) ** (2 / (s - 1))
        return G.mean(axis=-1), (G * G).mean(axis=-1)

    def g1(beta, alpha):
        m1, _ = moments(beta)
        return m1 * m1 + 0.0 * alpha

    def g12(beta, alpha):
        m1, m2 = moments(beta)
        return m1 * m2 + 0.0 * alpha

    h1 = sphere_average(g1, spec).value
    h2 = sphere_average(g12, spec).value / h1
    return h1, h2


_WINDOWS = {
    "azimuthal": ((0.0, 3.0), (0.0, 1.0)),
    "polar": ((-1.0, 1.0), (0.0, 3.0)),
}


def angular_approx_error(c: float, mu: float, which: str, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Relative error of the closed-form angular averages.

    ``which="azimuthal"``: (1/2pi) int_0^2pi (1 + c cos^2)^mu  ~  (1 + c/2)^mu,
    claimed for 0 <= c <= 3, 0 <= mu <= 1.
    ``which="polar"``: (1/2) int_0^pi sin (1 + c cos^2)^mu  ~  (1 + c/3)^mu,
    claimed for |c| < 1, 0 <= mu <= 3.
    """
    try:
        (c_lo, c_hi), (mu_lo, mu_hi) = _WINDOWS[which]
    except KeyError:
        raise ValueError(f"which must be 'azimuthal' or 'polar', got {which!r}") from None
    c_ok = (c_lo < c < c_hi) if which == "polar" else (c_lo <= c <= c_hi)
    if not (c_ok and mu_lo <= mu <= mu_hi):
        raise ValueError(f"(c={c}, mu={mu}) outside the {which} window")
    if which == "azimuthal":
        exact = quadrature_1d(lambda x: (1 + c * math.cos(x) ** 2) ** mu, 0, 2 * math.pi, spec).value / (2 * math.pi)
        approx = (1 + c / 2) ** mu
    else:
        exact = quadrature_1d(lambda x: math.sin(x) * (1 + c * math.cos(x) ** 2) ** mu, 0, math.pi, spec).value / 2
        approx = (1 + c / 3) ** mu
    return abs(exact - approx) / exact
