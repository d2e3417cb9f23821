"""Thermal gas, collision rate and the decoherence function.

Three levels of the decoherence function are provided, from cheapest to
most complete:

* :meth:`DecoherenceModel.eta_closed` - the Dawson form D(R / w_eta);
* :meth:`DecoherenceModel.eta_xi` - one quadrature against the
  distribution nu(xi) of the scaled momentum;
* :meth:`DecoherenceModel.eta_oracle` - the thermal double integral over
  momentum and scattering angle with the Gaussian differential cross
  section and the exact sinc kernel.

:func:`anisotropy_linear_check` measures how the angular integral reacts to
shifting the gas distribution by the molecule's momentum.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy import special

from .numerics import (
    DEFAULT_SPEC,
    QuadratureSpec,
    QuadResult,
    UnconvergedWarning,
    dawson_D,
    gauss_legendre,
    quadrature_1d,
)
from .scattering import (
    InteractionPotential,
    diff_xsec_params,
    sigma_tot_closed,
)
from .units import HBAR, K_B, most_probable_momentum

__all__ = [
    "MassRatioWarning",
    "GasEnvironment",
    "Rotor",
    "MoleculeSpec",
    "DecoherenceModel",
    "boltzmann_mu",
    "rate_leading",
    "rate_full",
    "nu_distribution",
    "xi_s",
    "deco_width_at",
    "deco_width",
    "LinearCheck",
    "anisotropy_linear_check",
    "shifted_angular_integral",
    "shifted_angular_integral_bruteforce",
]


class MassRatioWarning(UserWarning):
    """The molecule is not much heavier than the gas atom (M/m < 20)."""


MASS_RATIO_MIN = 20.0


@dataclass(frozen=True)
class GasEnvironment:
    """Thermal gas: atom mass m (kg), temperature T (K), density n_g (m^-3), polarizability (SI)."""

    m: float
    T: float
    n_g: float
    alpha0: float

    def __post_init__(self):
        for name in ("m", "T", "n_g", "alpha0"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"GasEnvironment.{name} must be positive, got {v!r}")

    @classmethod
    def from_pressure(cls, m: float, T: float, pressure: float, alpha0: float) -> "GasEnvironment":
        if not pressure > 0:
            raise ValueError("pressure must be positive")
        return cls(m=m, T=T, n_g=pressure / (K_B * T), alpha0=alpha0)

    @property
    def p_g(self) -> float:
        """Most probable momentum sqrt(2 m k_B T)."""
        return most_probable_momentum(self.m, self.T)


@dataclass(frozen=True)
class Rotor:
    """Linear rigid rotor of the given length (m) at internal temperature T_M (K)."""

    length: float
    T_M: float

    def __post_init__(self):
        if not (self.length > 0 and self.T_M > 0):
            raise ValueError("rotor length and T_M must be positive")


@dataclass(frozen=True)
class MoleculeSpec:
    """Molecule mass M (kg), beam speed v_M (m/s), dipole d0 (C m), optional rotor."""

    M: float
    v_M: float
    d0: float
    rotor: Optional[Rotor] = None

    def __post_init__(self):
        if not (math.isfinite(self.M) and self.M > 0):
            raise ValueError(f"MoleculeSpec.M must be positive, got {self.M!r}")
        if not (math.isfinite(self.v_M) and self.v_M >= 0):
            raise ValueError(f"MoleculeSpec.v_M must be >= 0, got {self.v_M!r}")
        if not (math.isfinite(self.d0) and self.d0 >= 0):
            raise ValueError(f"MoleculeSpec.d0 must be >= 0, got {self.d0!r}")

    def check_mass_ratio(self, gas: GasEnvironment) -> float:
        """Return M/m, warning with :class:`MassRatioWarning` if it is below 20."""
        ratio = self.M / gas.m
        if ratio < MASS_RATIO_MIN:
            warnings.warn(
                f"M/m = {ratio:.3g} < {MASS_RATIO_MIN:g}: the heavy-molecule approximation is doubtful",
                MassRatioWarning,
                stacklevel=2,
            )
        return ratio


# --------------------------------------------------------------------------
# gas distribution and rate


def boltzmann_mu(p, gas: GasEnvironment):
    """Maxwell-Boltzmann momentum density, normalised as integral d^3p mu = 1."""
    p = np.asarray(p, dtype=float)
    if np.any(p < 0):
        raise ValueError("momentum magnitude must be >= 0")
    pg = gas.p_g
    out = (math.pi * pg * pg) ** -1.5 * np.exp(-((p / pg) ** 2))
    return out[()] if out.ndim == 0 else out


def rate_leading(gas: GasEnvironment, pot: InteractionPotential, molecule: MoleculeSpec | None = None) -> float:
    """Leading-order collision rate, 2 n p_g Gamma((2s-3)/(s-1)) <sigma(p_g)> / (m sqrt(pi)), in 1/s."""
    s = pot.s
    pg = gas.p_g
    return (
        2 * gas.n_g * pg / (gas.m * math.sqrt(math.pi))
        * special.gamma((2 * s - 3) / (s - 1))
        * sigma_tot_closed(pg, pot, gas.m)
    )


def _rate_integral(gas, pot, p0, n):
    s = pot.s
    pg = gas.p_g
    # x = p^2/p_g^2; p^3 <sigma(p)> dp gives the Laguerre weight x^(1 - 1/(s-1)) e^-x
    x, wx = special.roots_genlaguerre(n, 1 - 1 / (s - 1))
    c, wc = gauss_legendre(-1.0, 1.0, 48)
    kappa = 2 * (p0 / pg)
    ang = np.exp(-kappa * np.sqrt(x)[:, None] * c[None, :]) @ wc
    pref = (
        gas.n_g / gas.m * 2 * math.pi * math.pi**-1.5 * pg / 2
        * sigma_tot_closed(pg, pot, gas.m) * math.exp(-((p0 / pg) ** 2))
    )
    return pref * float(wx @ ang)


def rate_full(
    gas: GasEnvironment,
    pot: InteractionPotential,
    molecule: MoleculeSpec,
    rel_tol: float = 1e-10,
) -> float:
    """Collision rate with the gas distribution shifted by the molecule's momentum m v_M.

    gamma = (n/m) int d^3p p mu(|p + m v_M|) <sigma(p)>, reduced by azimuthal
    symmetry about v_M to an integral over x = (p/p_g)^2 (generalized
    Gauss-Laguerre) and c = cos(p, v_M) (Gauss-Legendre). The x rule is
    doubled once to confirm ``rel_tol``.
    """
    molecule.check_mass_ratio(gas)
    p0 = gas.m * molecule.v_M
    g1 = _rate_integral(gas, pot, p0, 96)
    g2 = _rate_integral(gas, pot, p0, 192)
    if abs(g2 - g1) > rel_tol * abs(g2):
        warnings.warn(f"rate_full: unconverged ({abs(g2 - g1) / g2:.2e})", UnconvergedWarning)
    return g2


# --------------------------------------------------------------------------
# scaled-momentum distribution


def nu_distribution(xi, s: float):
    """Density of xi = (p/p_g)^(1 - 1/(s-1)) under the collision-weighted thermal distribution."""
    if not s > 3:
        raise ValueError("s must be > 3")
    xi = np.asarray(xi, dtype=float)
    if np.any(xi < 0):
        raise ValueError("xi must be >= 0")
    out = (
        2 * (s - 1) * xi ** (4 * s - 7) * np.exp(-(xi ** (2 * (s - 1))))
        / special.gamma((2 * s - 3) / (s - 1))
    )
    return out[()] if out.ndim == 0 else out


def xi_s(s: float) -> float:
    """Mean of nu: Gamma(2 - 1/(2(s-1))) / Gamma(2 - 1/(s-1))."""
    if not s > 3:
        raise ValueError("s must be > 3")
    return math.exp(special.gammaln(2 - 1 / (2 * (s - 1))) - special.gammaln(2 - 1 / (s - 1)))


def _xi_upper(s: float) -> float:
    # nu is below exp(-700) beyond this point
    return 700.0 ** (1 / (2 * (s - 1)))


def deco_width_at(p_g: float, pot: InteractionPotential, m: float) -> float:
    """w_eta = 2 hbar / (xi_s p_g theta_*(p_g)) for a given most probable momentum."""
    _, ts = diff_xsec_params(p_g, pot, m)
    return 2 * HBAR / (xi_s(pot.s) * p_g * ts)


# --------------------------------------------------------------------------
# model


@dataclass(frozen=True)
class DecoherenceModel:
    """Rate and decoherence function for one potential in one gas.

    Derived fields (``gamma``, ``theta_star_g``, ``xi_s``, ``w_eta``) are
    computed once at construction.
    """

    pot: InteractionPotential
    gas: GasEnvironment
    gamma: float = field(init=False)
    theta_star_g: float = field(init=False)
    xi_s: float = field(init=False)
    w_eta: float = field(init=False)

    def __post_init__(self):
        self.pot.require_differential()
        pg = self.gas.p_g
        _, ts = diff_xsec_params(pg, self.pot, self.gas.m)
        xs = xi_s(self.pot.s)
        object.__setattr__(self, "gamma", rate_leading(self.gas, self.pot))
        object.__setattr__(self, "theta_star_g", ts)
        object.__setattr__(self, "xi_s", xs)
        object.__setattr__(self, "w_eta", 2 * HBAR / (xs * pg * ts))

    @property
    def p_g(self) -> float:
        return self.gas.p_g

    @property
    def most_probable_kick(self) -> float:
        """sqrt(2) hbar / w_eta, the maximum of 4 pi P^2 eta~(P)."""
        return math.sqrt(2) * HBAR / self.w_eta

    @property
    def width_over_sqrt_sigma(self) -> float:
        """w_eta / sqrt(<sigma_tot(p_g)>), about 0.56 for s = 6."""
        return self.w_eta / math.sqrt(sigma_tot_closed(self.p_g, self.pot, self.gas.m))

    # -- decoherence function --------------------------------------------

    @staticmethod
    def _check_R(R):
        R = np.asarray(R, dtype=float)
        if not np.all(np.isfinite(R)):
            raise ValueError("R must be finite")
        return R

    def eta_closed(self, R):
        """D(|R| / w_eta)."""
        R = self._check_R(R)
        return dawson_D(np.abs(R) / self.w_eta)

    def eta_xi(self, R, spec: QuadratureSpec = DEFAULT_SPEC):
        """Average of D(p_g |R| theta_*(p_g) xi / 2 hbar) over nu(xi)."""
        R = self._check_R(R)
        s = self.pot.s
        k = self.p_g * self.theta_star_g / (2 * HBAR)
        top = _xi_upper(s)

        def one(r):
            if r == 0:
                return 1.0
            res = quadrature_1d(lambda x: nu_distribution(x, s) * dawson_D(k * r * x), 0.0, top, spec, points=[1.0])
            return res.value

        out = np.vectorize(one, otypes=[float])(np.abs(R))
        return out[()] if out.ndim == 0 else out

    def _oracle_raw(self, R, n_x, n_theta):
        s = self.pot.s
        x, wx = special.roots_genlaguerre(n_x, 1 - 1 / (s - 1))
        p = self.p_g * np.sqrt(x)
        _, ts1 = diff_xsec_params(1.0, self.pot, self.gas.m)
        ts = ts1 * p ** (-1 + 1 / (s - 1))
        # p^3 mu(p) A(p) theta_*(p)^2 dp is the Laguerre weight up to a constant,
        # so the angular integral enters divided by theta_*^2
        tmax = np.minimum(math.pi, 10 * ts)
        u, wu = gauss_legendre(0.0, 1.0, n_theta)
        th = tmax[:, None] * u[None, :]
        ang = (wu * tmax[:, None]) * np.sin(th) * np.exp(-((th / ts[:, None]) ** 2)) / ts[:, None] ** 2
        half = np.sin(th / 2) * 2 * p[:, None] / HBAR
        out = np.empty(len(R))
        for j, r in enumerate(R):
            out[j] = wx @ np.sum(ang * np.sinc(half * r / math.pi), axis=1)
        return out

    def eta_oracle(self, R, n_x: int = 48, n_theta: int = 192, rel_tol: float = 1e-4):
        """Thermal momentum and scattering-angle integral with the sinc kernel.

        Uses the Gaussian differential cross section at every momentum,
        sin(theta) measure and the exact kernel sinc(2 p R sin(theta/2) / hbar),
        normalised by its own value at R = 0. Generalized Gauss-Laguerre in
        (p/p_g)^2 and Gauss-Legendre in theta on [0, min(pi, 10 theta_*(p))];
        both rules are doubled once to check ``rel_tol``.
        """
        R = self._check_R(R)
        flat = np.abs(np.atleast_1d(R)).ravel()
        grid = np.concatenate([[0.0], flat])
        a = self._oracle_raw(grid, n_x, n_theta)
        b = self._oracle_raw(grid, 2 * n_x, 2 * n_theta)
        ea, eb = a[1:] / a[0], b[1:] / b[0]
        err = np.max(np.abs(eb - ea)) if len(eb) else 0.0
        if err > rel_tol:
            warnings.warn(f"eta_oracle: unconverged ({err:.2e})", UnconvergedWarning)
        out = eb.reshape(np.shape(R))
        return out[()] if out.ndim == 0 else out

    def eta_fourier(self, P):
        """Momentum-kick density eta~(P) = (1/2 pi P) (w/2hbar)^2 exp(-(P w/2hbar)^2), in (kg m/s)^-3."""
        P = np.asarray(P, dtype=float)
        if np.any(P <= 0) or not np.all(np.isfinite(P)):
            raise ValueError("eta_fourier is singular at P = 0; P must be positive and finite")
        c = self.w_eta / (2 * HBAR)
        out = c * c / (2 * math.pi * P) * np.exp(-((c * P) ** 2))
        return out[()] if out.ndim == 0 else out


def deco_width(model: DecoherenceModel) -> float:
    return model.w_eta


# --------------------------------------------------------------------------
# shifted gas distribution in the angular integral


class LinearCheck(NamedTuple):
    slope: float
    slope_imag: float
    p0: np.ndarray
    deviation: np.ndarray
    I0: complex


def _kernel_K(c, zeta, ts, n_theta):
    """2 pi int sin(th) g(th) exp(-i zeta c cos th) J0(zeta sqrt(1-c^2) sin th) dth, g = exp(-(th/ts)^2)."""
    tmax = min(math.pi, 10 * ts)
    th, wt = gauss_legendre(0.0, tmax, n_theta)
    g = np.sin(th) * np.exp(-((th / ts) ** 2)) * wt
    c = np.asarray(c)[:, None]
    ph = np.exp(-1j * zeta * c * np.cos(th)) * special.j0(zeta * np.sqrt(1 - c * c) * np.sin(th))
    return 2 * math.pi * (ph @ g)


def shifted_angular_integral(
    p: float, p0: float, angle: float, R: float, model: DecoherenceModel,
    n_c: int = 256, n_theta: int = 256,
) -> complex:
    """Double sphere integral of mu(|p n + p0|) <|f|^2>(n.n') exp(i zeta u.(n - n')).

    ``angle`` is the angle between the shift p0 and the separation direction u;
    zeta = p R / hbar. The Gaussian cross section enters without its forward
    value A(p). Integrating n' about n gives a Bessel J0, integrating n about
    u gives a modified Bessel I0 of the transverse part of the shift.
    """
    gas = model.gas
    pg = gas.p_g
    _, ts = diff_xsec_params(p, model.pot, gas.m)
    zeta = p * R / HBAR
    c, wc = gauss_legendre(-1.0, 1.0, n_c)
    K = _kernel_K(c, zeta, ts, n_theta)
    a = 2 * p * p0 / pg**2
    # exp(-a c cos) I0(a sin sqrt(1-c^2)), written with the scaled i0e for stability
    arg_perp = a * math.sin(angle) * np.sqrt(1 - c * c)
    mu = (
        (math.pi * pg * pg) ** -1.5 * np.exp(-(p * p + p0 * p0) / pg**2)
        * np.exp(-a * math.cos(angle) * c + arg_perp) * special.i0e(arg_perp)
    )
    return complex(2 * math.pi * np.sum(wc * mu * np.exp(1j * zeta * c) * K))


def shifted_angular_integral_bruteforce(
    p: float, p0_vec, u, R: float, model: DecoherenceModel,
    n_lab: int = 48, n_theta: int = 64, n_psi: int = 32, first_order: bool = False,
) -> complex:
    """Same double sphere integral as :func:`shifted_angular_integral`, by a 4-D product rule.

    n runs over a lab-frame Gauss x trapezoid grid; n' is parametrised by
    its angle theta to n and an azimuth psi about n. With ``first_order`` the
    distribution is replaced by its linear term (p0.n) d mu/dp.
    """
    gas = model.gas
    pg = gas.p_g
    _, ts = diff_xsec_params(p, model.pot, gas.m)
    zeta = p * R / HBAR
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    p0_vec = np.asarray(p0_vec, dtype=float)

    cb, wb = gauss_legendre(-1.0, 1.0, n_lab)
    al = 2 * math.pi * np.arange(2 * n_lab) / (2 * n_lab)
    CB, AL = np.meshgrid(cb, al, indexing="ij")
    SB = np.sqrt(1 - CB * CB)
    n = np.stack([SB * np.cos(AL), SB * np.sin(AL), CB], axis=-1)
    e1 = np.stack([CB * np.cos(AL), CB * np.sin(AL), -SB], axis=-1)
    e2 = np.stack([-np.sin(AL), np.cos(AL), np.zeros_like(AL)], axis=-1)
    w_n = (wb[:, None] * np.full(len(al), 2 * math.pi / len(al))[None, :])

    tmax = min(math.pi, 10 * ts)
    th, wt = gauss_legendre(0.0, tmax, n_theta)
    ps = 2 * math.pi * np.arange(n_psi) / n_psi
    w_rel = (wt * np.sin(th) * np.exp(-((th / ts) ** 2)))[:, None] * (2 * math.pi / n_psi)

    un = n @ u
    u1 = e1 @ u
    u2 = e2 @ u
    # u.n' = cos(th) u.n + sin(th) (cos(psi) u.e1 + sin(psi) u.e2)
    ct, st = np.cos(th), np.sin(th)
    cp, sp = np.cos(ps), np.sin(ps)
    inner = np.empty(un.shape, dtype=complex)
    for i in range(un.shape[0]):
        un_n = (
            ct[None, :, None] * un[i][:, None, None]
            + st[None, :, None] * (cp[None, None, :] * u1[i][:, None, None] + sp[None, None, :] * u2[i][:, None, None])
        )
        ph = np.exp(-1j * zeta * un_n)
        inner[i] = np.einsum("atp,tp->a", ph, w_rel)
    inner *= np.exp(1j * zeta * un)

    if first_order:
        dmu = -2 * p / pg**2 * (math.pi * pg * pg) ** -1.5 * math.exp(-((p / pg) ** 2))
        weight = (n @ p0_vec) * dmu
    else:
        q = np.linalg.norm(p * n + p0_vec, axis=-1)
        weight = (math.pi * pg * pg) ** -1.5 * np.exp(-((q / pg) ** 2))
    return complex(np.sum(w_n * weight * inner))


def anisotropy_linear_check(
    p0_magnitudes,
    direction_angle: float,
    model: DecoherenceModel,
    p: float | None = None,
    R: float | None = None,
) -> LinearCheck:
    """Fit the order of the deviation I(p0) - I(0) in the shift magnitude.

    ``direction_angle`` is the angle between the shift and the separation
    direction u (pi/2 for a shift along the beam and u along the grating
    axis). Defaults: p = p_g and R = w_eta. Returns the log-log slopes of
    |Re(I - I0)| and |Im(I - I0)| (the latter NaN when it vanishes).
    """
    p0 = np.asarray(p0_magnitudes, dtype=float)
    pg = model.p_g
    if np.any(p0 <= 0) or np.any(p0 > 0.2 * pg):
        raise ValueError("shift magnitudes must lie in (0, 0.2 p_g]")
    p = pg if p is None else p
    R = model.w_eta if R is None else R
    I0 = shifted_angular_integral(p, 0.0, direction_angle, R, model)
    dev = np.array([shifted_angular_integral(p, q, direction_angle, R, model) for q in p0]) - I0
    lx = np.log(p0)
    slope = float(np.polyfit(lx, np.log(np.abs(dev.real)), 1)[0])
    im = np.abs(dev.imag)
    if np.all(im > 1e-9 * abs(I0)):
        slope_imag = float(np.polyfit(lx, np.log(im), 1)[0])
    else:
        slope_imag = float("nan")
    return LinearCheck(slope, slope_imag, p0, dev / abs(I0), I0)
