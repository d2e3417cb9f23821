import math

import pytest
import scipy.constants as sc
from hypothesis import given
from hypothesis import strategies as st

from polardeco import units
from polardeco.units import (
    AMU,
    CONSTANTS,
    DEBYE,
    HBAR,
    K_B,
    UnitError,
    from_internal,
    most_probable_momentum,
    number_density,
    to_internal,
)


def test_constants_match_codata():
    assert HBAR == pytest.approx(sc.hbar, rel=1e-12)
    assert K_B == pytest.approx(sc.k, rel=1e-12)
    assert units.EPSILON0 == pytest.approx(sc.epsilon_0, rel=1e-9)
    assert AMU == pytest.approx(sc.atomic_mass, rel=1e-9)
    assert DEBYE == pytest.approx(1e-21 / sc.c, rel=1e-9)


def test_polarizability_volume_conversion():
    # alpha_SI = 4 pi eps0 * alpha_volume
    assert CONSTANTS.angstrom3_to_SI_polarizability == pytest.approx(4 * math.pi * sc.epsilon_0 * 1e-30, rel=1e-9)


@pytest.mark.parametrize("unit,si", [("mPa", 1e-3), ("nm", 1e-9), ("K", 1.0), ("amu", AMU), ("D", DEBYE)])
def test_factors(unit, si):
    assert to_internal(1.0, unit) == pytest.approx(si)


@given(st.floats(min_value=1e-200, max_value=1e200) | st.floats(min_value=-1e200, max_value=-1e-200),
       st.sampled_from(["amu", "K", "Pa", "mPa", "Debye", "A3", "nm", "m/s", "Å³"]))
def test_round_trip(value, unit):
    assert from_internal(to_internal(value, unit), unit) == pytest.approx(value, rel=1e-14)


def test_unknown_unit():
    with pytest.raises(UnitError, match="unknown unit"):
        to_internal(1.0, "furlong")


def test_number_density_and_momentum():
    n = number_density(5e-3, 300.0)
    assert n == pytest.approx(5e-3 / (sc.k * 300.0))
    assert n == pytest.approx(1.2071e18, rel=1e-4)
    pg = most_probable_momentum(4 * AMU, 300.0)
    assert pg / (4 * AMU) == pytest.approx(1116.77, rel=1e-5)
    with pytest.raises(ValueError):
        number_density(-1.0, 300.0)
