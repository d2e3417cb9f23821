"""Approximation-error and oracle-equivalence checks.

:func:`run_validation` evaluates every check and returns one
:class:`Check` per row of the report. A check that raises is recorded as
an error, and one whose quadratures warn :class:`UnconvergedWarning` is
flagged, so the caller can decide the exit status.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .config import ScenarioConfig, parse_config
from .decoherence import (
    DecoherenceModel,
    GasEnvironment,
    MoleculeSpec,
    Rotor,
    anisotropy_linear_check,
    deco_width_at,
    nu_distribution,
    rate_full,
    rate_leading,
    xi_s,
)
from .interferometry import (
    measured_pedestal_width,
    pattern_characteristic,
    pattern_free,
    pattern_with_chamber,
    pedestal_width,
    sudden_approx_report,
)
from .numerics import QuadratureSpec, UnconvergedWarning, quadrature_1d, radial_fourier3
from .scattering import (
    InteractionPotential,
    anisotropy_factors,
    angular_approx_error,
    dipole_induced_dipole,
    orientation_enhancement,
    sigma_tot_closed,
    sigma_tot_numeric,
    sigma_tot_optical,
)
from .units import AMU, CONSTANTS, DEBYE

__all__ = ["Check", "REFERENCE_CONFIG", "reference_scenario", "run_validation"]

REFERENCE_CONFIG = """{
  "schema_version": 1,
  "gas": {"species": "He", "mass_amu": 4, "temperature_K": 300,
          "pressure_mPa": 5, "polarizability_A3": 0.2},
  "molecule": {"mass_amu": 840, "speed_m_s": 50, "dipole_D": 5,
               "rotor": {"length_nm": 3, "temperature_K": 1000}},
  "potential": {"dipole_induced_dipole": {}},
  "interferometer": {"L_m": 1.0, "Lc_over_L": [0.001, 0.02, 0.1, 0.5],
                     "ellc_over_L": 0.05, "d_nm": 200, "H_over_d": 5,
                     "phi0_rad": 3.141592653589793}
}"""


def reference_scenario() -> ScenarioConfig:
    """He at 300 K and 5 mPa, an 840 amu molecule with 5 D at 50 m/s, d = 200 nm, L = 1 m."""
    return parse_config(REFERENCE_CONFIG)


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    bound: float
    passed: bool
    unconverged: bool = False
    error: str = ""
    seconds: float = 0.0


def _le(name, value, bound):
    return name, float(value), float(bound), bool(value <= bound)


# --------------------------------------------------------------------------
# individual checks; each returns a list of (name, value, bound, passed)


def _enhancement(cfg, spec):
    closed = (1 + 3 / 3) ** 0.4
    pot = cfg.potential
    ratio = sigma_tot_closed(1.0, InteractionPotential(pot.C, 6.0, 3.0), 1.0) / sigma_tot_closed(
        1.0, InteractionPotential(pot.C, 6.0, 0.0), 1.0
    )
    num = orientation_enhancement(3.0, 6.0, spec).value
    return [
        _le("enhancement_closed_abs_err", abs(ratio - 2**0.4), 1e-12),
        _le("enhancement_numeric_rel_err", abs(num - closed) / closed, 0.03),
    ]


def _reference_width():
    alpha = 0.2 * CONSTANTS.angstrom3_to_SI_polarizability
    pot = dipole_induced_dipole(alpha, 5 * DEBYE)
    m = 4 * AMU
    pg = 1000.0 * m
    w = deco_width_at(pg, pot, m)
    return w, w / math.sqrt(sigma_tot_closed(pg, pot, m))


def _width(cfg, spec):
    w, ratio = _reference_width()
    return [
        _le("w_eta_rel_dev_from_0.5nm", abs(w / 0.5e-9 - 1), 0.15),
        ("w_over_sqrt_sigma", ratio, 0.60, bool(0.53 <= ratio <= 0.60)),
    ]


def _kick_ratio(cfg, spec):
    w, _ = _reference_width()
    r = 200e-9 / (math.sqrt(2) * math.pi * w)
    return [_le("kick_ratio_rel_dev_from_90", abs(r / 90 - 1), 0.10)]


def _sudden(cfg, spec):
    alpha = 0.2 * CONSTANTS.angstrom3_to_SI_polarizability
    pot = dipole_induced_dipole(alpha, 5 * DEBYE)
    gas = GasEnvironment.from_pressure(4 * AMU, 300.0, 5e-3, alpha)
    mol = MoleculeSpec(1000 * AMU, 50.0, 5 * DEBYE, Rotor(3e-9, 1000.0))
    rep = sudden_approx_report(mol, gas, pot)
    fac = max(rep.tau_rot / 40e-12, 40e-12 / rep.tau_rot)
    return [
        _le("tau_c_rel_dev_from_0.7ps", abs(rep.tau_c / 0.7e-12 - 1), 0.10),
        _le("tau_rot_factor_from_40ps", fac, 2.0),
        ("tau_rot_over_tau_c", rep.ratio, 10.0, bool(rep.ratio >= 10.0)),
    ]


def _eta_levels(cfg, spec):
    model = cfg.model()
    w = model.w_eta
    R5 = np.linspace(0, 5, 21) * w
    R10 = np.linspace(0, 10, 41) * w
    eo = model.eta_oracle(R5)
    ex5 = model.eta_xi(R5)
    ex = model.eta_xi(R10)
    ec = model.eta_closed(R10)
    d_ox = float(np.max(np.abs(eo / ex5 - 1)))
    ok = np.all((np.abs(ex / ec - 1) <= 0.05) | (np.abs(ex - ec) <= 0.02))
    worst = float(np.max(np.minimum(np.abs(ex / ec - 1) / 0.05, np.abs(ex - ec) / 0.02)))
    return [
        _le("eta_oracle_vs_xi_rel", d_ox, 0.03),
        ("eta_xi_vs_closed_scaled", worst, 1.0, bool(ok)),
    ]


def _kicks(cfg, spec):
    model = cfg.model()
    pk = model.most_probable_kick
    worst = 0.0
    for f in np.linspace(0.3, 5.0, 11):
        P = f * pk
        num = radial_fourier3(lambda R: model.eta_closed(R), P, spec, scale=model.w_eta).value
        worst = max(worst, abs(num / model.eta_fourier(P) - 1))
    norm = _kick_norm(model)
    # stationary point of log(4 pi P^2 eta~) by a central difference and brentq
    h = 1e-5 * pk

    def dlog(P):
        return (np.log((P + h) ** 2 * model.eta_fourier(P + h))
                - np.log((P - h) ** 2 * model.eta_fourier(P - h))) / (2 * h) * pk

    arg = brentq(dlog, 0.5 * pk, 1.5 * pk, xtol=1e-14 * pk, rtol=1e-15)
    return [
        _le("kick_transform_rel", worst, 0.02),
        _le("kick_norm_abs_err", abs(norm - 1), 1e-6),
        _le("most_probable_kick_rel", abs(arg / pk - 1), 1e-8),
    ]


def _kick_norm(model: DecoherenceModel) -> float:
    # integrate in units of the most probable kick
    pk = model.most_probable_kick
    f = lambda u: 4 * math.pi * (u * pk) ** 2 * model.eta_fourier(u * pk) * pk
    return quadrature_1d(f, 0.0, np.inf, QuadratureSpec(rel_tol=1e-10, abs_tol=1e-14)).value


def _linear_order(cfg, spec):
    model = cfg.model()
    gas, pot = cfg.gas, cfg.potential
    lead = rate_leading(gas, pot)
    vs = np.array([1.0, 2.0, 4.0, 8.0])
    dev = [
        abs(rate_full(gas, pot, MoleculeSpec(cfg.molecule.M, v, cfg.molecule.d0)) / lead - 1) for v in vs
    ]
    slope_rate = float(np.polyfit(np.log(vs), np.log(dev), 1)[0])
    p0 = gas.m * vs
    lc = anisotropy_linear_check(p0, math.pi / 2, model)
    return [
        ("rate_shift_slope", slope_rate, 2.0, bool(abs(slope_rate - 2) <= 0.1)),
        ("angular_integral_shift_slope", lc.slope, 2.0, bool(abs(lc.slope - 2) <= 0.1)),
    ]


def _angular(cfg, spec):
    out = []
    cs = np.linspace(0, 3, 31)
    mus = np.linspace(0, 1, 31)
    e1 = max(angular_approx_error(c, m, "azimuthal", spec) for c in cs for m in mus)
    out.append(_le("angular_azimuthal_max_err", e1, 0.03))
    cs = np.linspace(-1, 1, 33)[1:-1]
    cs = np.linspace(cs[0], cs[-1], 31)
    mus = np.linspace(0, 3, 31)
    e2 = max(angular_approx_error(c, m, "polar", spec) for c in cs for m in mus)
    out.append(_le("angular_polar_max_err", e2, 0.03))
    worst = 0.0
    for a in np.linspace(0, 3, 7):
        hn = anisotropy_factors(a, 6.0, "numeric", spec)
        hc = anisotropy_factors(a, 6.0, "closed")
        worst = max(worst, abs(hn[0] / hc[0] - 1), abs(hn[1] / hc[1] - 1))
    out.append(_le("h1_h2_max_rel_err", worst, 0.03))
    return out


def _nu_mean(cfg, spec):
    worst = 0.0
    for s in (6.0, 7.0, 12.0):
        top = 700.0 ** (1 / (2 * (s - 1)))
        mean = quadrature_1d(lambda x: x * nu_distribution(x, s), 0.0, top,
                             QuadratureSpec(rel_tol=1e-12, abs_tol=1e-14), points=[1.0]).value
        worst = max(worst, abs(mean - xi_s(s)))
    return [_le("nu_mean_abs_err", worst, 1e-6)]


def _dipole_ratio(cfg, spec):
    gas = cfg.gas
    g1 = rate_leading(gas, dipole_induced_dipole(gas.alpha0, 5 * DEBYE))
    g2 = rate_leading(gas, dipole_induced_dipole(gas.alpha0, 2 * DEBYE))
    return [_le("dipole_ratio_rel_err", abs((g1 / g2) / 2.5**0.8 - 1), 1e-10)]


def _interference(cfg, spec):
    if cfg.interferometer is None:
        return []
    out = []
    confs = cfg.interferometer_configs()
    widths = [pedestal_width(c)[0] for c in confs]
    dx = confs[0].delta_x
    # one wide grid holds every pedestal
    half = 6 + 8 * max(widths) / dx
    wide = [c.with_grid(half, int(2 * half * 40) + 1) for c in confs]
    w0 = pattern_free(wide[0])
    worst_norm = 0.0
    for c in wide:
        w = pattern_with_chamber(c, w0)
        worst_norm = max(worst_norm, abs(w.norm / w0.norm - 1))
    out.append(_le("chamber_norm_rel_err", worst_norm, 1e-3))

    i_far = int(np.argmax([c.L_c for c in confs]))
    c = wide[i_far]
    w = pattern_with_chamber(c, w0)
    sel = np.abs(w.x) <= 2.5 * dx
    ped = (w.intensity - math.exp(-c.attenuation) * w0.intensity)[sel]
    out.append(_le("far_chamber_pedestal_flatness", (ped.max() - ped.min()) / ped.mean(), 0.10))

    i_near = int(np.argmin([c.L_c for c in confs]))
    c = wide[i_near]
    w = pattern_with_chamber(c, w0)
    fac = measured_pedestal_width(w, w0, c) / widths[i_near]
    out.append(_le("near_chamber_width_factor", max(fac, 1 / fac), 2.0))

    worst = 0.0
    for c in (confs[i_near], confs[min(1, len(confs) - 1)]):
        dI = pedestal_width(c)[0]
        h = 5 + 8 * dI / dx
        g = c.with_grid(h, int(2 * h * 80) + 1)
        w1 = pattern_with_chamber(g, pattern_free(g))
        sel = np.abs(w1.x) <= 5 * dx
        w2 = pattern_characteristic(g, w1.x[sel])
        worst = max(worst, float(np.max(np.abs(w1.intensity[sel] - w2.intensity)) / w2.intensity.max()))
    out.append(_le("route_equivalence_rel", worst, 5e-3))
    return out


def _optical(cfg, spec):
    pot = cfg.potential
    pg = cfg.gas.p_g
    opt = sigma_tot_optical(pg, pot, cfg.gas.m).value
    num = sigma_tot_numeric(pg, pot, cfg.gas.m, spec)
    return [_le("optical_theorem_rel", abs(opt / num - 1), 0.01)]


CHECKS: list[tuple[str, Callable]] = [
    ("enhancement", _enhancement),
    ("width", _width),
    ("kick_ratio", _kick_ratio),
    ("sudden", _sudden),
    ("eta_levels", _eta_levels),
    ("kicks", _kicks),
    ("linear_order", _linear_order),
    ("angular", _angular),
    ("nu_mean", _nu_mean),
    ("dipole_ratio", _dipole_ratio),
    ("interference", _interference),
    ("optical", _optical),
]


def run_validation(cfg: ScenarioConfig | None = None, spec: QuadratureSpec | None = None,
                   only: list[str] | None = None) -> list[Check]:
    """Run the checks (all, or those named in ``only``) for a scenario."""
    cfg = reference_scenario() if cfg is None else cfg
    spec = cfg.numerics if spec is None else spec
    results = []
    for group, fn in CHECKS:
        if only is not None and group not in only:
            continue
        t0 = time.perf_counter()
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", UnconvergedWarning)
            try:
                rows = fn(cfg, spec)
                err = ""
            except Exception as exc:  # recorded, never swallowed silently
                rows = [(group, float("nan"), float("nan"), False)]
                err = f"{type(exc).__name__}: {exc}"
        unconv = any(issubclass(w.category, UnconvergedWarning) for w in caught)
        dt = time.perf_counter() - t0
        for name, value, bound, ok in rows:
            results.append(Check(name, value, bound, ok, unconv, err, dt))
    return results
