"""Acceptance criteria, one test each. Every test prints a single
``[ACCEPT n] PASS|FAIL <summary>`` line (visible with ``pytest -s`` or in
the captured output of a failure)."""
from __future__ import annotations

import math
import time

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from polardeco.decoherence import (
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
from polardeco.interferometry import (
    measured_pedestal_width,
    pattern_characteristic,
    pattern_free,
    pattern_with_chamber,
    pedestal_width,
    sudden_approx_report,
)
from polardeco.numerics import QuadratureSpec, quadrature_1d, radial_fourier3
from polardeco.scattering import (
    InteractionPotential,
    angular_approx_error,
    anisotropy_factors,
    dipole_induced_dipole,
    orientation_enhancement,
    sigma_tot_closed,
    sigma_tot_numeric,
    sigma_tot_optical,
)
from polardeco.units import AMU, CONSTANTS, DEBYE
from polardeco.validation import reference_scenario

ALPHA_HE = 0.2 * CONSTANTS.angstrom3_to_SI_polarizability
M_HE = 4 * AMU


def report(n: int, ok: bool, text: str) -> None:
    print(f"[ACCEPT {n:2d}] {'PASS' if ok else 'FAIL'} {text}")


@pytest.fixture(scope="module")
def scenario():
    return reference_scenario()


@pytest.fixture(scope="module")
def model(scenario):
    return scenario.model()


def _he_width():
    pot = dipole_induced_dipole(ALPHA_HE, 5 * DEBYE)
    pg = 1000.0 * M_HE
    w = deco_width_at(pg, pot, M_HE)
    return w, pot, pg


def test_criterion_01_anisotropy_enhancement():
    t0 = time.perf_counter()
    C = 1e-78
    closed = sigma_tot_closed(1.0, InteractionPotential(C, 6.0, 3.0), 1.0) / sigma_tot_closed(
        1.0, InteractionPotential(C, 6.0, 0.0), 1.0)
    num = orientation_enhancement(3.0, 6.0).value
    dt = time.perf_counter() - t0
    err_c = abs(closed - 2**0.4)
    err_n = abs(num / closed - 1)
    ok = err_c <= 1e-12 and err_n <= 0.03 and dt < 1.0
    report(1, ok, f"closed={closed:.12f} |err|={err_c:.1e}, numeric rel={err_n:.4f}, {dt:.2f}s")
    assert err_c <= 1e-12
    assert err_n <= 0.03
    assert dt < 1.0


def test_criterion_02_decoherence_width():
    t0 = time.perf_counter()
    w, pot, pg = _he_width()
    ratio = w / math.sqrt(sigma_tot_closed(pg, pot, M_HE))
    dt = time.perf_counter() - t0
    dev = abs(w / 0.5e-9 - 1)
    ok = dev <= 0.15 and 0.53 <= ratio <= 0.60 and dt < 1.0
    report(2, ok, f"w_eta={w * 1e9:.4f} nm (dev {dev:.3f}), w/sqrt(sigma)={ratio:.4f}, {dt:.2f}s")
    assert dev <= 0.15
    assert 0.53 <= ratio <= 0.60
    assert dt < 1.0


def test_criterion_03_kick_ratio():
    t0 = time.perf_counter()
    w, _, _ = _he_width()
    r = 200e-9 / (math.sqrt(2) * math.pi * w)
    dt = time.perf_counter() - t0
    dev = abs(r / 90 - 1)
    report(3, dev <= 0.10 and dt < 1.0, f"d/(sqrt2 pi w)={r:.2f} (dev {dev:.3f}), {dt:.2f}s")
    assert dev <= 0.10
    assert dt < 1.0


def test_criterion_04_sudden_approximation():
    t0 = time.perf_counter()
    pot = dipole_induced_dipole(ALPHA_HE, 5 * DEBYE)
    gas = GasEnvironment.from_pressure(M_HE, 300.0, 5e-3, ALPHA_HE)
    mol = MoleculeSpec(1000 * AMU, 50.0, 5 * DEBYE, Rotor(3e-9, 1000.0))
    rep = sudden_approx_report(mol, gas, pot)
    dt = time.perf_counter() - t0
    dev_c = abs(rep.tau_c / 0.7e-12 - 1)
    fac = max(rep.tau_rot / 40e-12, 40e-12 / rep.tau_rot)
    ok = dev_c <= 0.10 and fac <= 2.0 and dt < 1.0
    report(4, ok, f"tau_c={rep.tau_c * 1e12:.3f} ps (dev {dev_c:.3f}), "
                  f"tau_rot={rep.tau_rot * 1e12:.1f} ps (factor {fac:.2f}), {dt:.2f}s")
    assert dev_c <= 0.10
    assert fac <= 2.0
    assert rep.tau_rot > rep.tau_c
    assert dt < 1.0


def test_criterion_05_eta_level_consistency(model):
    t0 = time.perf_counter()
    w = model.w_eta
    R5 = np.linspace(0, 5, 21) * w
    R10 = np.linspace(0, 10, 41) * w
    d_ox = float(np.max(np.abs(model.eta_oracle(R5) / model.eta_xi(R5) - 1)))
    ex, ec = model.eta_xi(R10), model.eta_closed(R10)
    within = (np.abs(ex / ec - 1) <= 0.05) | (np.abs(ex - ec) <= 0.02)
    dt = time.perf_counter() - t0
    ok = d_ox <= 0.03 and bool(within.all()) and dt < 60
    report(5, ok, f"oracle/xi max rel={d_ox:.2e}, xi/closed points in band={within.sum()}/{within.size}, {dt:.1f}s")
    assert d_ox <= 0.03
    assert within.all()
    assert dt < 60


def test_criterion_06_momentum_kick_transform(model):
    t0 = time.perf_counter()
    pk = model.most_probable_kick
    worst = 0.0
    for f in np.linspace(0.3, 5.0, 20):
        P = f * pk
        num = radial_fourier3(model.eta_closed, P, QuadratureSpec(rel_tol=1e-8), scale=model.w_eta).value
        worst = max(worst, abs(num / model.eta_fourier(P) - 1))
    dens = lambda u: 4 * math.pi * (u * pk) ** 2 * model.eta_fourier(u * pk) * pk
    norm = quadrature_1d(dens, 0.0, np.inf, QuadratureSpec(rel_tol=1e-12, abs_tol=1e-14)).value
    # locate the maximum of the radial density numerically
    res = minimize_scalar(lambda u: -math.log(dens(u)), bounds=(0.5, 1.5), method="bounded",
                          options={"xatol": 1e-12})
    dt = time.perf_counter() - t0
    mp_err = abs(res.x - 1)
    ok = worst <= 0.02 and abs(norm - 1) <= 1e-6 and mp_err <= 1e-8 and dt < 60
    report(6, ok, f"transform max rel={worst:.2e}, |norm-1|={abs(norm - 1):.1e}, mode rel={mp_err:.1e}, {dt:.1f}s")
    assert worst <= 0.02
    assert abs(norm - 1) <= 1e-6
    assert mp_err <= 1e-8
    assert dt < 60


def test_criterion_07_vanishing_linear_order(scenario, model):
    t0 = time.perf_counter()
    gas, pot = scenario.gas, scenario.potential
    lead = rate_leading(gas, pot)
    vs = np.array([1.0, 2.0, 4.0, 8.0])
    dev = [abs(rate_full(gas, pot, MoleculeSpec(scenario.molecule.M, v, scenario.molecule.d0)) / lead - 1)
           for v in vs]
    slope_rate = float(np.polyfit(np.log(vs), np.log(dev), 1)[0])
    lc = anisotropy_linear_check(gas.m * vs, math.pi / 2, model)
    dt = time.perf_counter() - t0
    ok = abs(slope_rate - 2) <= 0.1 and abs(lc.slope - 2) <= 0.1 and dt < 300
    report(7, ok, f"rate slope={slope_rate:.4f}, integral slope={lc.slope:.4f}, {dt:.1f}s")
    assert abs(slope_rate - 2) <= 0.1
    assert abs(lc.slope - 2) <= 0.1
    assert dt < 300


def test_criterion_08_angular_approximation_bounds():
    """The azimuthal window and h1/h2 meet 3%; the polar window does not
    (the approximation is off by about 31% near |c| -> 1 at large mu).
    Left failing on purpose, see the decisions ledger."""
    t0 = time.perf_counter()
    e_az = max(angular_approx_error(c, m, "azimuthal")
               for c in np.linspace(0, 3, 31) for m in np.linspace(0, 1, 31))
    # open interval |c| < 1: 31 interior points
    cs = np.linspace(-1, 1, 33)[1:-1]
    cs = np.linspace(cs[0], cs[-1], 31)
    e_pol = max(angular_approx_error(c, m, "polar") for c in cs for m in np.linspace(0, 3, 31))
    worst_h = 0.0
    for a in np.linspace(0, 3, 7):
        hn = anisotropy_factors(a, 6.0, "numeric")
        hc = anisotropy_factors(a, 6.0, "closed")
        worst_h = max(worst_h, abs(hn[0] / hc[0] - 1), abs(hn[1] / hc[1] - 1))
    dt = time.perf_counter() - t0
    ok = e_az <= 0.03 and e_pol <= 0.03 and worst_h <= 0.03 and dt < 60
    report(8, ok, f"azimuthal max={e_az:.4f}, polar max={e_pol:.4f}, h1/h2 max={worst_h:.4f}, {dt:.1f}s")
    assert e_az <= 0.03
    assert worst_h <= 0.03
    assert dt < 60
    assert e_pol <= 0.03, f"polar angular approximation error {e_pol:.4f} exceeds 3%"


def test_criterion_09_nu_mean():
    t0 = time.perf_counter()
    worst = 0.0
    for s in (6.0, 7.0, 12.0):
        top = 700.0 ** (1 / (2 * (s - 1)))
        mean = quadrature_1d(lambda x: x * nu_distribution(x, s), 0.0, top,
                             QuadratureSpec(rel_tol=1e-12, abs_tol=1e-14), points=[1.0]).value
        worst = max(worst, abs(mean - xi_s(s)))
    dt = time.perf_counter() - t0
    report(9, worst <= 1e-6 and dt < 1.0, f"max |mean - xi_s|={worst:.1e}, {dt:.2f}s")
    assert worst <= 1e-6
    assert dt < 1.0


def test_criterion_10_dipole_ratio(scenario):
    t0 = time.perf_counter()
    gas = scenario.gas
    g1 = rate_leading(gas, dipole_induced_dipole(gas.alpha0, 5 * DEBYE))
    g2 = rate_leading(gas, dipole_induced_dipole(gas.alpha0, 2 * DEBYE))
    err = abs((g1 / g2) / 2.5**0.8 - 1)
    dt = time.perf_counter() - t0
    report(10, err <= 1e-10 and dt < 1.0, f"gamma ratio rel err={err:.1e}, {dt:.3f}s")
    assert err <= 1e-10
    assert dt < 1.0


@pytest.fixture(scope="module")
def wide_patterns(scenario, model):
    confs = scenario.interferometer_configs(model)
    widths = [pedestal_width(c)[0] for c in confs]
    dx = confs[0].delta_x
    half = 6 + 8 * max(widths) / dx
    wide = [c.with_grid(half, int(2 * half * 40) + 1) for c in confs]
    w0 = pattern_free(wide[0])
    ws = [pattern_with_chamber(c, w0) for c in wide]
    return wide, widths, w0, ws


def test_criterion_11_interference_normalization(wide_patterns):
    t0 = time.perf_counter()
    wide, widths, w0, ws = wide_patterns
    dx = wide[0].delta_x
    norms = [abs(w.norm / w0.norm - 1) for w in ws]
    ratios = [c.L_c / c.L for c in wide]

    far = ratios.index(0.5)
    c, w = wide[far], ws[far]
    sel = np.abs(w.x) <= 2.5 * dx
    ped = (w.intensity - math.exp(-c.attenuation) * w0.intensity)[sel]
    flat = (ped.max() - ped.min()) / ped.mean()

    near = ratios.index(0.001)
    fac = measured_pedestal_width(ws[near], w0, wide[near]) / widths[near]
    fac = max(fac, 1 / fac)
    dt = time.perf_counter() - t0
    ok = max(norms) <= 1e-3 and flat <= 0.10 and fac <= 2.0
    report(11, ok, f"max |norm ratio-1|={max(norms):.1e} over {len(norms)} L_c, far pedestal spread={flat:.3f}, "
                   f"near width factor={fac:.3f}, {dt:.1f}s (+pattern setup)")
    assert len(norms) == 4
    assert max(norms) <= 1e-3
    assert flat <= 0.10
    assert fac <= 2.0


def test_criterion_12_route_equivalence(scenario, model):
    t0 = time.perf_counter()
    confs = scenario.interferometer_configs(model)
    dx = confs[0].delta_x
    worst = 0.0
    for c in (confs[0], confs[1]):
        dI = pedestal_width(c)[0]
        h = 5 + 8 * dI / dx
        g = c.with_grid(h, int(2 * h * 80) + 1)
        w1 = pattern_with_chamber(g, pattern_free(g))
        sel = np.abs(w1.x) <= 5 * dx
        w2 = pattern_characteristic(g, w1.x[sel])
        worst = max(worst, float(np.max(np.abs(w1.intensity[sel] - w2.intensity)) / w2.intensity.max()))
    dt = time.perf_counter() - t0
    report(12, worst <= 5e-3 and dt < 600, f"max route difference={worst:.2e} of peak, {dt:.1f}s")
    assert worst <= 5e-3
    assert dt < 600


def test_criterion_13_optical_theorem(scenario):
    t0 = time.perf_counter()
    pot = InteractionPotential(scenario.potential.C, 6.0, 3.0)
    pg, m = scenario.gas.p_g, scenario.gas.m
    opt = sigma_tot_optical(pg, pot, m).value
    num = sigma_tot_numeric(pg, pot, m)
    err = abs(opt / num - 1)
    dt = time.perf_counter() - t0
    report(13, err <= 0.01 and dt < 300, f"optical/numeric rel={err:.1e}, {dt:.1f}s")
    assert err <= 0.01
    assert dt < 300
