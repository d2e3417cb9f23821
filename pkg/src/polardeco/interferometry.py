"""Far-field interference behind a phase grating, with a collision chamber.

A point source at distance L before the grating and a screen at distance L
behind it. A chamber of length ``ell_c`` filled with gas ends at distance
``L_c`` in front of the screen. Two independent computations of the screen
signal are provided:

* convolution route: the undisturbed pattern w0 from the chirped
  integral over the grating, then w = e^{-gamma ell/v} (w0 + w0 * h) with the
  kernel h obtained by FFT from the chamber factor;
* characteristic-function route: the state behind the grating is written
  as a characteristic function chi(s, q), sheared and damped by
  :func:`propagate_characteristic`, and the screen marginal is a single
  q-integral.

Positions are in metres, momenta in kg m/s, the pattern in 1/m.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy import signal

from .decoherence import DecoherenceModel, GasEnvironment, MoleculeSpec
from .numerics import composite_gauss_legendre, gauss_legendre
from .scattering import InteractionPotential
from .units import HBAR, K_B

__all__ = [
    "GratingSpec",
    "InterferometerConfig",
    "Pattern",
    "PiecewiseRate",
    "SuddenReport",
    "grating_transmission",
    "pattern_free",
    "chamber_factor",
    "chamber_kernel",
    "pattern_with_chamber",
    "grating_characteristic",
    "propagate_characteristic",
    "pattern_characteristic",
    "pedestal_width",
    "measured_pedestal_width",
    "central_visibility",
    "sudden_approx_report",
]

MIN_POINTS_PER_FRINGE = 20


@dataclass(frozen=True)
class GratingSpec:
    """Phase grating: period d (m), width H (m), peak phase phi0 (rad)."""

    d: float
    H: float
    phi0: float

    def __post_init__(self):
        if not (self.d > 0 and self.H > 0):
            raise ValueError("grating period and width must be positive")
        if self.H / self.d < 1:
            raise ValueError(f"grating must span at least one period (H/d = {self.H / self.d:g})")
        if not math.isfinite(self.phi0):
            raise ValueError("phi0 must be finite")


@dataclass(frozen=True)
class InterferometerConfig:
    """Geometry, molecule, gas model and detector grid.

    The detector grid is ``n_points`` equally spaced points on
    [-x_half_width, x_half_width] * Delta_x.
    """

    grating: GratingSpec
    L: float
    L_c: float
    ell_c: float
    molecule: MoleculeSpec
    model: DecoherenceModel
    x_half_width: float = 6.0
    n_points: int = 4096

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("L must be positive")
        if self.L_c < 0 or self.ell_c < 0:
            raise ValueError("L_c and ell_c must be >= 0")
        if self.L_c + self.ell_c > self.L * (1 + 1e-12):
            raise ValueError("the chamber must lie between grating and screen (L_c + ell_c <= L)")
        if not self.molecule.v_M > 0:
            raise ValueError("interferometry needs a moving molecule (v_M > 0)")
        if not (self.x_half_width > 0 and self.n_points >= 3):
            raise ValueError("detector grid needs x_half_width > 0 and at least 3 points")

    # derived geometry
    @property
    def Mv(self) -> float:
        return self.molecule.M * self.molecule.v_M

    @property
    def delta_x(self) -> float:
        """Far-field peak separation 2 pi hbar L / (d M v)."""
        return 2 * math.pi * HBAR * self.L / (self.grating.d * self.Mv)

    @property
    def t1(self) -> float:
        return self.L / self.molecule.v_M

    t2 = t1

    @property
    def far_field_parameter(self) -> float:
        """H^2 / (d Delta_x); small in the far field."""
        return self.grating.H**2 / (self.grating.d * self.delta_x)

    @property
    def gamma(self) -> float:
        return self.model.gamma

    @property
    def attenuation(self) -> float:
        """gamma ell_c / v."""
        return self.gamma * self.ell_c / self.molecule.v_M

    @property
    def x(self) -> np.ndarray:
        X = self.x_half_width * self.delta_x
        return np.linspace(-X, X, int(self.n_points))

    @property
    def grid_spacing(self) -> float:
        return 2 * self.x_half_width * self.delta_x / (int(self.n_points) - 1)

    def with_grid(self, x_half_width: float, n_points: int) -> "InterferometerConfig":
        return dataclasses.replace(self, x_half_width=x_half_width, n_points=int(n_points))

    def replace(self, **changes) -> "InterferometerConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class Pattern:
    x: np.ndarray
    intensity: np.ndarray

    @property
    def norm(self) -> float:
        """Trapezoid-rule integral of the intensity over the grid."""
        return float(np.trapezoid(self.intensity, self.x))


# --------------------------------------------------------------------------
# grating and undisturbed pattern


def grating_transmission(x, grating: GratingSpec):
    """t(x) = exp(i phi0 cos^2(pi x / d)) inside |x| < H/2, zero outside."""
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < grating.H / 2
    out = np.where(inside, np.exp(1j * grating.phi0 * np.cos(math.pi * x / grating.d) ** 2), 0.0)
    return out[()] if out.ndim == 0 else out


def _check_grid(config: InterferometerConfig):
    per_fringe = config.delta_x / config.grid_spacing
    if per_fringe < MIN_POINTS_PER_FRINGE:
        need = math.ceil(2 * config.x_half_width * MIN_POINTS_PER_FRINGE) + 1
        raise ValueError(
            f"detector grid under-resolved: {per_fringe:.1f} points per fringe, "
            f"need >= {MIN_POINTS_PER_FRINGE} (n_points >= {need})"
        )


def _chirped_amplitude(x, config: InterferometerConfig, chunk: int = 256):
    g = config.grating
    k = config.Mv / (HBAR * config.L)
    half = g.H / 2
    # phase of the integrand changes by k (H + |x|) H plus the grating's own variation
    out = np.empty(len(x), dtype=complex)
    order = np.argsort(np.abs(x))
    for start in range(0, len(x), chunk):
        idx = order[start:start + chunk]
        xm = np.abs(x[idx]).max()
        span = k * g.H * (g.H + xm) + 2 * abs(g.phi0) * g.H / g.d + 2 * math.pi * g.H / g.d
        # 12 Gauss nodes per 2.5 rad of phase
        npan = max(4, math.ceil(span / 2.5))
        xp, wp = composite_gauss_legendre(np.linspace(-half, half, npan + 1), 12)
        f = wp * np.exp(1j * (k * xp * xp + g.phi0 * np.cos(math.pi * xp / g.d) ** 2))
        out[idx] = np.exp(-1j * k * np.outer(x[idx], xp)) @ f
    return out


def pattern_free(config: InterferometerConfig, x=None) -> Pattern:
    """Undisturbed screen pattern from the chirped integral over the grating.

    w0(x) = (k / 2 pi H) |int dx' exp(-i k x'(x - x')) t(x')|^2 with
    k = M v / (hbar L). The prefactor is fixed by Parseval's theorem so that
    w0 integrates to one over the whole screen; on a finite grid the norm
    falls short by the flux outside it.
    """
    if x is None:
        _check_grid(config)
        x = config.x
    x = np.asarray(x, dtype=float)
    k = config.Mv / (HBAR * config.L)
    amp = _chirped_amplitude(x, config)
    w0 = k / (2 * math.pi * config.grating.H) * np.abs(amp) ** 2
    return Pattern(x, w0)


# --------------------------------------------------------------------------
# convolution route


def chamber_factor(q, config: InterferometerConfig, n_nodes: int = 96):
    """B(q) = exp[(gamma/v) int_0^ell dz eta(q (L_c + z)/(M v))] - 1.

    The z-integral uses Gauss-Legendre in log(L_c + z), which follows the
    1/z^2 decay of eta when the chamber spans many decades of q z.
    """
    q = np.atleast_1d(np.asarray(q, dtype=float))
    v = config.molecule.v_M
    ell, Lc = config.ell_c, config.L_c
    if ell == 0 or config.gamma == 0:
        return np.zeros_like(q)
    if Lc > 0:
        u, wu = gauss_legendre(math.log(Lc), math.log(Lc + ell), n_nodes)
        r, wr = np.exp(u), wu * np.exp(u)
    else:
        cut = ell * 1e-4
        r1, w1 = gauss_legendre(0.0, cut, n_nodes // 2)
        u, wu = gauss_legendre(math.log(cut), math.log(ell), n_nodes)
        r = np.concatenate([r1, np.exp(u)])
        wr = np.concatenate([w1, wu * np.exp(u)])
    eta = config.model.eta_closed(np.outer(np.abs(q), r) / config.Mv)
    return np.expm1(config.gamma / v * (eta @ wr))


def chamber_kernel(config: InterferometerConfig, spacing: float | None = None, extent: float = 10.0):
    """Kernel h on a symmetric uniform grid with the detector spacing.

    h(y) = (1/2 pi hbar) int dq exp(-i q y / hbar) B(q), obtained by a discrete
    Fourier transform of B sampled on the grid dual to the box. The box
    half-width is ``extent`` hbar (L_c + ell_c) / (w_eta M v), far beyond the
    largest deflection. Returns (y, h); h sums to B(0) exactly.
    """
    dy = config.grid_spacing if spacing is None else spacing
    reach = extent * HBAR * (config.L_c + config.ell_c) / (config.model.w_eta * config.Mv)
    K = max(8, math.ceil(reach / dy))
    N = 2 * K + 1
    q = 2 * math.pi * HBAR * np.fft.fftfreq(N, dy)
    B = chamber_factor(q, config)
    h = np.fft.fftshift(np.fft.fft(B).real) / (N * dy)
    y = (np.arange(N) - K) * dy
    return y, h


def pattern_with_chamber(config: InterferometerConfig, w0: Optional[Pattern] = None) -> Pattern:
    """w = exp(-gamma ell_c / v) (w0 + w0 * h) on the detector grid.

    The convolution is a direct sum on the uniform grid, done with FFTs;
    w0 is taken as zero outside the grid.
    """
    if w0 is None:
        w0 = pattern_free(config)
    x = w0.x
    dx = x[1] - x[0]
    if not np.allclose(np.diff(x), dx, rtol=1e-9, atol=0):
        raise ValueError("pattern_with_chamber needs a uniform detector grid")
    if not math.isclose(dx, config.grid_spacing, rel_tol=1e-9) and len(x) == config.n_points:
        raise ValueError("w0 grid does not match the configuration's detector grid")
    if config.attenuation == 0:
        return Pattern(x, w0.intensity.copy())
    _, h = chamber_kernel(config, spacing=dx)
    conv = signal.fftconvolve(w0.intensity, h, mode="same") * dx
    return Pattern(x, math.exp(-config.attenuation) * (w0.intensity + conv))


# --------------------------------------------------------------------------
# characteristic-function route


@dataclass(frozen=True)
class PiecewiseRate:
    """Piecewise-constant collision rate: ``rates[i]`` on [edges[i], edges[i+1]); zero elsewhere."""

    edges: tuple
    rates: tuple

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=float)
        if len(e) != len(self.rates) + 1 or np.any(np.diff(e) < 0):
            raise ValueError("edges must be nondecreasing with one more entry than rates")
        if any(r < 0 for r in self.rates):
            raise ValueError("rates must be >= 0")

    @classmethod
    def zero(cls) -> "PiecewiseRate":
        return cls((0.0, 0.0), (0.0,))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        e = np.asarray(self.edges)
        out = np.zeros_like(t)
        for a, b, r in zip(e[:-1], e[1:], self.rates):
            out = np.where((t >= a) & (t < b), r, out)
        return out

    def shifted(self, dt: float) -> "PiecewiseRate":
        return PiecewiseRate(tuple(e + dt for e in self.edges), self.rates)

    def then(self, other: "PiecewiseRate", at: float) -> "PiecewiseRate":
        """This profile followed by ``other`` started at time ``at``."""
        o = other.shifted(at)
        return PiecewiseRate(
            tuple(self.edges) + tuple(o.edges), tuple(self.rates) + (0.0,) + tuple(o.rates)
        )


def propagate_characteristic(
    chi0: Callable,
    t: float,
    rate: PiecewiseRate,
    mass: float,
    eta: Callable,
    n_nodes: int = 128,
) -> Callable:
    """Free flight for time ``t`` with collisional damping.

    Returns chi_t(s, q) = chi0(s - q t / M, q) * exp{int_0^t dtau gamma(tau)
    [eta(s - q (t - tau)/M) - 1]}. ``eta`` is the one-dimensional
    decoherence function; the tau-integral is Gauss-Legendre with ``n_nodes``
    per constant piece of the rate.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    pieces = [
        (max(a, 0.0), min(b, t), r)
        for a, b, r in zip(rate.edges[:-1], rate.edges[1:], rate.rates)
        if r > 0 and min(b, t) > max(a, 0.0)
    ]
    nodes, weights = [], []
    for a, b, r in pieces:
        tau, w = gauss_legendre(a, b, n_nodes)
        nodes.append(tau)
        weights.append(w * r)
    tau = np.concatenate(nodes) if nodes else np.zeros(0)
    wt = np.concatenate(weights) if weights else np.zeros(0)

    def chi_t(s, q):
        s = np.asarray(s, dtype=float)
        q = np.asarray(q, dtype=float)
        s, q = np.broadcast_arrays(s, q)
        base = chi0(s - q * t / mass, q)
        if len(tau) == 0:
            return base
        arg = s[..., None] - q[..., None] * (t - tau) / mass
        expo = (np.asarray(eta(arg)) - 1.0) @ wt
        return base * np.exp(expo)

    return chi_t


def grating_characteristic(s, q, config: InterferometerConfig):
    """Characteristic function of the state just behind the grating.

    chi(s, q) = int dx exp(i q x/hbar) rho(x - s/2, x + s/2) for the point-source
    wave front of curvature k = M v/(hbar L) times t(x), normalised to
    chi(0, 0) = 1. Real because t is even.
    """
    g = config.grating
    k = config.Mv / (HBAR * config.L)
    s, q = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(q, dtype=float))
    half = np.clip(g.H / 2 - np.abs(s) / 2, 0.0, None)
    n = 2 * max(64, 16 * math.ceil(g.H / g.d + k * g.H**2 / math.pi))
    u, wu = gauss_legendre(-1.0, 1.0, n)
    xs = half[..., None] * u
    phase = (q / HBAR - k * s)[..., None] * xs + g.phi0 * np.sin(math.pi * s / g.d)[..., None] * np.sin(
        2 * math.pi * xs / g.d
    )
    return (np.cos(phase) @ wu) * half / g.H


def _q_nodes(config: InterferometerConfig, x_max: float, per_panel: int = 16):
    q_max = config.grating.H * config.Mv / config.L
    span = config.L_c + config.ell_c
    q_c = config.Mv * config.model.w_eta / span if span > 0 else q_max
    period = 2 * math.pi * HBAR / max(x_max, config.delta_x)
    fine = min(q_c, q_max) * 1e-4
    geo = np.geomspace(fine, min(q_c, q_max), 40)
    step = min(period, q_c) / 4
    lin = np.arange(geo[-1], q_max, step)
    edges = np.unique(np.concatenate([[0.0], geo, lin, [q_max]]))
    return composite_gauss_legendre(edges, per_panel)


def pattern_characteristic(config: InterferometerConfig, x=None) -> Pattern:
    """Screen pattern from the characteristic-function route.

    chi behind the grating is propagated over t2 = L / v with the chamber
    rate switched on while the molecule is inside the chamber; the screen
    marginal is w(x) = (1/pi hbar) int_0^qmax dq cos(q x/hbar) chi(0, q),
    exact because chi vanishes beyond q_max = H M v / L.
    """
    if x is None:
        x = config.x
    x = np.asarray(x, dtype=float)
    v = config.molecule.v_M
    t2 = config.t2
    rate = PiecewiseRate(
        (t2 - (config.L_c + config.ell_c) / v, t2 - config.L_c / v), (config.gamma,)
    )
    chi_screen = propagate_characteristic(
        lambda s, q: grating_characteristic(s, q, config),
        t2, rate, config.molecule.M, config.model.eta_closed,
    )
    q, wq = _q_nodes(config, np.abs(x).max())
    chi = chi_screen(np.zeros_like(q), q)
    w = (np.cos(np.outer(x, q) / HBAR) @ (wq * chi)) / (math.pi * HBAR)
    return Pattern(x, w)


# --------------------------------------------------------------------------
# estimates and measurements


def pedestal_width(config: InterferometerConfig) -> tuple[float, float]:
    """Estimate of the pedestal width and the ratio d / (sqrt(2) pi w_eta).

    Delta_I / Delta_x = d/(sqrt(2) pi w_eta) * (L_c + ell_c/2) / L, i.e. the
    deflection of the most probable kick received mid-chamber.
    """
    ratio = config.grating.d / (math.sqrt(2) * math.pi * config.model.w_eta)
    dI = config.delta_x * ratio * (config.L_c + config.ell_c / 2) / config.L
    return dI, ratio


def measured_pedestal_width(w: Pattern, w0: Pattern, config: InterferometerConfig) -> float:
    """Half width at half maximum of w - exp(-gamma ell/v) w0 (outermost crossing)."""
    ped = w.intensity - math.exp(-config.attenuation) * w0.intensity
    top = ped.max()
    above = np.nonzero(ped >= top / 2)[0]
    i = above.max()
    if i + 1 >= len(ped):
        raise ValueError("pedestal does not fall to half maximum inside the grid")
    # linear interpolation to the crossing
    x0, x1 = w.x[i], w.x[i + 1]
    y0, y1 = ped[i], ped[i + 1]
    return float(x0 + (top / 2 - y0) * (x1 - x0) / (y1 - y0))


def central_visibility(pattern: Pattern, delta_x: float) -> float:
    """(max - min)/(max + min) of the intensity within one fringe spacing of the centre."""
    sel = np.abs(pattern.x) <= delta_x
    w = pattern.intensity[sel]
    return float((w.max() - w.min()) / (w.max() + w.min()))


class SuddenReport(NamedTuple):
    R_w: float
    tau_c: float
    tau_rot: float
    ratio: float


def sudden_approx_report(
    molecule: MoleculeSpec, gas: GasEnvironment, pot: InteractionPotential
) -> SuddenReport:
    """Collision time versus rotation period.

    R_w = (2 m C / hbar^2)^(1/(s-2)), tau_c = m R_w / p_g. The rotor is a thin
    rod, I = M l^2 / 12, turning at the thermal rate (1/2) I w^2 = (1/2) k_B T_M;
    tau_rot = 2 pi / w. ``ratio`` is tau_rot / tau_c, large when collisions
    are sudden.
    """
    if molecule.rotor is None:
        raise ValueError("sudden_approx_report needs rotor parameters (length, T_M)")
    m = gas.m
    R_w = (2 * m * pot.C / HBAR**2) ** (1 / (pot.s - 2))
    tau_c = m * R_w / gas.p_g
    inertia = molecule.M * molecule.rotor.length**2 / 12
    omega = math.sqrt(K_B * molecule.rotor.T_M / inertia)
    tau_rot = 2 * math.pi / omega
    return SuddenReport(R_w, tau_c, tau_rot, tau_rot / tau_c)
