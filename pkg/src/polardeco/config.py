"""Strict JSON scenario configuration.

Every quantity carries its unit in the key name (``temperature_K``,
``pressure_mPa``, ``dipole_D``, ...) and is converted to SI here, once.
Unknown keys are errors. Error messages name the offending key path, e.g.
``gas.temperature_K``.

Example (shipped as ``configs/chamber_scan.json``)::

    {
      "schema_version": 1,
      "gas": {"species": "He", "mass_amu": 4, "temperature_K": 300,
              "pressure_mPa": 5, "polarizability_A3": 0.2},
      "molecule": {"mass_amu": 840, "speed_m_s": 50, "dipole_D": 5},
      "potential": {"dipole_induced_dipole": {}},
      "interferometer": {"L_m": 1.0, "Lc_over_L": [0.001, 0.02, 0.1, 0.5],
                         "ellc_over_L": 0.05, "d_nm": 200, "H_over_d": 5,
                         "phi0_rad": 3.141592653589793}
    }
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Optional

from .decoherence import DecoherenceModel, GasEnvironment, MoleculeSpec, Rotor
from .interferometry import GratingSpec, InterferometerConfig
from .numerics import QuadratureSpec
from .scattering import InteractionPotential, dipole_induced_dipole
from .units import to_internal

__all__ = [
    "SCHEMA_VERSION",
    "ConfigError",
    "InterferometerBlock",
    "OutputBlock",
    "ScenarioConfig",
    "parse_config",
    "load_config",
]

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid configuration; ``path`` is the dotted key path at fault."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


# --------------------------------------------------------------------------
# small typed readers


def _join(path, key):
    return f"{path}.{key}" if path else key


def _obj(doc, path) -> dict:
    if not isinstance(doc, dict):
        raise ConfigError(path, "expected a JSON object")
    return doc


def _keys(doc: dict, path: str, allowed: set):
    extra = sorted(set(doc) - allowed)
    if extra:
        raise ConfigError(_join(path, extra[0]), "unknown key")


def _num(doc, key, path, *, required=True, default=None, positive=False, nonneg=False, integer=False):
    p = _join(path, key)
    if key not in doc:
        if required:
            raise ConfigError(p, "missing required key")
        return default
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(p, f"expected a number, got {json.dumps(v)}")
    if not math.isfinite(v):
        raise ConfigError(p, "must be finite")
    if integer and int(v) != v:
        raise ConfigError(p, f"expected an integer, got {v}")
    if positive and not v > 0:
        raise ConfigError(p, f"must be > 0, got {v}")
    if nonneg and not v >= 0:
        raise ConfigError(p, f"must be >= 0, got {v}")
    return int(v) if integer else float(v)


def _numlist(doc, key, path, *, required=True, default=None, nonneg=False, positive=False):
    p = _join(path, key)
    if key not in doc:
        if required:
            raise ConfigError(p, "missing required key")
        return default
    v = doc[key]
    if not isinstance(v, list) or not v:
        raise ConfigError(p, "expected a non-empty list of numbers")
    return tuple(
        _num({str(i): x}, str(i), p, nonneg=nonneg, positive=positive) for i, x in enumerate(v)
    )


def _str(doc, key, path, *, required=True, default=None):
    p = _join(path, key)
    if key not in doc:
        if required:
            raise ConfigError(p, "missing required key")
        return default
    if not isinstance(doc[key], str):
        raise ConfigError(p, "expected a string")
    return doc[key]


def _exactly_one(doc, keys, path, what):
    present = [k for k in keys if k in doc]
    if len(present) != 1:
        shown = " or ".join(_join(path, k) for k in keys)
        raise ConfigError(path, f"exactly one {what} required ({shown}); found {len(present)}")
    return present[0]


# --------------------------------------------------------------------------
# blocks


@dataclass(frozen=True)
class InterferometerBlock:
    L: float
    Lc_over_L: tuple
    ellc_over_L: float
    d: float
    H_over_d: float
    phi0: float
    x_half_width: float = 6.0
    n_points: int = 4096

    @property
    def grating(self) -> GratingSpec:
        return GratingSpec(d=self.d, H=self.H_over_d * self.d, phi0=self.phi0)


@dataclass(frozen=True)
class OutputBlock:
    directory: Optional[str] = None
    R_points: int = 41
    R_max_over_w: float = 10.0
    P_points: int = 41
    p_over_pg: tuple = (0.5, 1.0, 2.0)
    v_M_list: tuple = (0.0, 1.0, 2.0, 4.0, 8.0)


@dataclass(frozen=True)
class ScenarioConfig:
    gas_label: str
    gas: GasEnvironment
    molecule: MoleculeSpec
    potential: InteractionPotential
    interferometer: Optional[InterferometerBlock]
    output: OutputBlock
    numerics: QuadratureSpec
    raw: dict = field(repr=False, compare=False)

    @property
    def config_hash(self) -> str:
        canon = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]

    def model(self) -> DecoherenceModel:
        return DecoherenceModel(self.potential, self.gas)

    def interferometer_configs(self, model: DecoherenceModel | None = None) -> list[InterferometerConfig]:
        if self.interferometer is None:
            raise ConfigError("interferometer", "block required for interference patterns")
        ib = self.interferometer
        model = self.model() if model is None else model
        return [
            InterferometerConfig(
                grating=ib.grating, L=ib.L, L_c=r * ib.L, ell_c=ib.ellc_over_L * ib.L,
                molecule=self.molecule, model=model,
                x_half_width=ib.x_half_width, n_points=ib.n_points,
            )
            for r in ib.Lc_over_L
        ]

    def si_summary(self) -> dict:
        """SI echo of the parsed physical inputs."""
        out = {
            "gas.m_kg": self.gas.m,
            "gas.T_K": self.gas.T,
            "gas.n_g_m-3": self.gas.n_g,
            "gas.alpha0_C_m2_V-1": self.gas.alpha0,
            "molecule.M_kg": self.molecule.M,
            "molecule.v_M_m_s-1": self.molecule.v_M,
            "molecule.d0_C_m": self.molecule.d0,
            "potential.C_J_m^s": self.potential.C,
            "potential.s": self.potential.s,
            "potential.a": self.potential.a,
        }
        if self.interferometer is not None:
            ib = self.interferometer
            out.update({"interferometer.L_m": ib.L, "interferometer.d_m": ib.d,
                        "interferometer.H_m": ib.H_over_d * ib.d, "interferometer.phi0_rad": ib.phi0})
        return out


def _parse_gas(doc, path):
    doc = _obj(doc, path)
    dens_keys = ("pressure_Pa", "pressure_mPa", "density_m3")
    _keys(doc, path, {"species", "mass_amu", "temperature_K", "polarizability_A3", *dens_keys})
    label = _str(doc, "species", path, required=False, default="gas")
    m = to_internal(_num(doc, "mass_amu", path, positive=True), "amu")
    T = _num(doc, "temperature_K", path, positive=True)
    alpha0 = to_internal(_num(doc, "polarizability_A3", path, positive=True), "A3")
    which = _exactly_one(doc, dens_keys, path, "of pressure or density")
    val = _num(doc, which, path, positive=True)
    if which == "density_m3":
        gas = GasEnvironment(m=m, T=T, n_g=val, alpha0=alpha0)
    else:
        P = to_internal(val, "mPa" if which == "pressure_mPa" else "Pa")
        gas = GasEnvironment.from_pressure(m, T, P, alpha0)
    return label, gas


def _parse_molecule(doc, path):
    doc = _obj(doc, path)
    _keys(doc, path, {"mass_amu", "speed_m_s", "dipole_D", "rotor"})
    M = to_internal(_num(doc, "mass_amu", path, positive=True), "amu")
    v = _num(doc, "speed_m_s", path, nonneg=True)
    d0 = to_internal(_num(doc, "dipole_D", path, nonneg=True), "Debye")
    rotor = None
    if "rotor" in doc:
        rp = _join(path, "rotor")
        r = _obj(doc["rotor"], rp)
        _keys(r, rp, {"length_nm", "temperature_K"})
        rotor = Rotor(
            length=to_internal(_num(r, "length_nm", rp, positive=True), "nm"),
            T_M=_num(r, "temperature_K", rp, positive=True),
        )
    return MoleculeSpec(M=M, v_M=v, d0=d0, rotor=rotor)


def _parse_potential(doc, path, gas, molecule):
    doc = _obj(doc, path)
    _keys(doc, path, {"dipole_induced_dipole", "explicit"})
    which = _exactly_one(doc, ("dipole_induced_dipole", "explicit"), path, "potential form")
    sub = _join(path, which)
    body = _obj(doc[which], sub)
    if which == "dipole_induced_dipole":
        _keys(body, sub, set())
        if molecule.d0 == 0:
            raise ConfigError("molecule.dipole_D", "dipole-induced-dipole potential needs a nonzero dipole")
        return dipole_induced_dipole(gas.alpha0, molecule.d0)
    _keys(body, sub, {"C_SI", "s", "a"})
    C = _num(body, "C_SI", sub, positive=True)
    s = _num(body, "s", sub)
    a = _num(body, "a", sub, nonneg=True)
    if not s > 3:
        raise ConfigError(_join(sub, "s"), f"must be > 3, got {s}")
    return InteractionPotential(C=C, s=s, a=a)


def _parse_interferometer(doc, path):
    doc = _obj(doc, path)
    _keys(doc, path, {"L_m", "Lc_over_L", "ellc_over_L", "d_nm", "H_over_d", "phi0_rad", "grid"})
    L = _num(doc, "L_m", path, positive=True)
    lcs = _numlist(doc, "Lc_over_L", path, nonneg=True)
    ell = _num(doc, "ellc_over_L", path, nonneg=True)
    for i, r in enumerate(lcs):
        if r + ell > 1:
            raise ConfigError(f"{path}.Lc_over_L.{i}", "chamber extends beyond the grating (Lc/L + ell_c/L > 1)")
    d = to_internal(_num(doc, "d_nm", path, positive=True), "nm")
    hd = _num(doc, "H_over_d", path, positive=True)
    if hd < 1:
        raise ConfigError(_join(path, "H_over_d"), "must be >= 1")
    phi0 = _num(doc, "phi0_rad", path)
    xw, npts = 6.0, 4096
    if "grid" in doc:
        gp = _join(path, "grid")
        g = _obj(doc["grid"], gp)
        _keys(g, gp, {"x_half_width_dx", "n_points"})
        xw = _num(g, "x_half_width_dx", gp, required=False, default=xw, positive=True)
        npts = _num(g, "n_points", gp, required=False, default=npts, positive=True, integer=True)
    return InterferometerBlock(L, lcs, ell, d, hd, phi0, xw, npts)


def _parse_output(doc, path):
    doc = _obj(doc, path)
    _keys(doc, path, {"dir", "R_points", "R_max_over_w", "P_points", "p_over_pg", "v_M_m_s"})
    return OutputBlock(
        directory=_str(doc, "dir", path, required=False),
        R_points=_num(doc, "R_points", path, required=False, default=41, positive=True, integer=True),
        R_max_over_w=_num(doc, "R_max_over_w", path, required=False, default=10.0, positive=True),
        P_points=_num(doc, "P_points", path, required=False, default=41, positive=True, integer=True),
        p_over_pg=_numlist(doc, "p_over_pg", path, required=False, default=(0.5, 1.0, 2.0), positive=True),
        v_M_list=_numlist(doc, "v_M_m_s", path, required=False, default=(0.0, 1.0, 2.0, 4.0, 8.0), nonneg=True),
    )


def _parse_numerics(doc, path):
    doc = _obj(doc, path)
    _keys(doc, path, {"rel_tol", "abs_tol", "max_subdivisions"})
    d = QuadratureSpec()
    return QuadratureSpec(
        rel_tol=_num(doc, "rel_tol", path, required=False, default=d.rel_tol, positive=True),
        abs_tol=_num(doc, "abs_tol", path, required=False, default=d.abs_tol, positive=True),
        max_subdivisions=_num(doc, "max_subdivisions", path, required=False, default=d.max_subdivisions,
                              positive=True, integer=True),
    )


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a JSON scenario; all values come back in SI."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"malformed JSON: {exc}") from None
    doc = _obj(doc, "")
    _keys(doc, "", {"schema_version", "gas", "molecule", "potential", "interferometer", "output", "numerics"})
    version = _num(doc, "schema_version", "", integer=True)
    if version != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"unsupported version {version} (expected {SCHEMA_VERSION})")
    for key in ("gas", "molecule", "potential"):
        if key not in doc:
            raise ConfigError(key, "missing required key")
    try:
        label, gas = _parse_gas(doc["gas"], "gas")
        molecule = _parse_molecule(doc["molecule"], "molecule")
        pot = _parse_potential(doc["potential"], "potential", gas, molecule)
        inter = _parse_interferometer(doc["interferometer"], "interferometer") if "interferometer" in doc else None
        output = _parse_output(doc.get("output", {}), "output")
        numerics = _parse_numerics(doc.get("numerics", {}), "numerics")
        if inter is not None:
            GratingSpec(inter.d, inter.H_over_d * inter.d, inter.phi0)
            if molecule.v_M == 0:
                raise ConfigError("molecule.speed_m_s", "must be > 0 for interference patterns")
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("", str(exc)) from None
    return ScenarioConfig(label, gas, molecule, pot, inter, output, numerics, raw=doc)


def load_config(path: str) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
