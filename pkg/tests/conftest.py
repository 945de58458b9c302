"""Shared fixtures: small devices for unit tests, full ones where frozen
anchor values demand the published lengths."""

import numpy as np
import pytest

from mmtwpa import devices
from mmtwpa.modes import build_mode_ladder
from mmtwpa.pump import solve_pump


def operating_point(bundle, fs_ghz, n_min=-3, n_max=2, drive=None):
    """(profile, ladder, pump) for a bundle at one signal frequency."""
    p = bundle.profile
    wp = bundle.pump_frequency_norm
    ladder = build_mode_ladder(p.from_ghz(fs_ghz), wp, n_min, n_max)
    drive_profile = bundle.drive_profile if drive is None else drive
    pump = solve_pump(p, wp, drive_profile,
                      wavevector_mode=bundle.wavevector_mode,
                      polynomial=bundle.kp_polynomial)
    return p, ladder, pump


@pytest.fixture(scope="session")
def table1_full():
    return devices.conventional_73ghz()


@pytest.fixture(scope="session")
def table1_small():
    return devices.conventional_73ghz(length_cells=64)


@pytest.fixture(scope="session")
def floquet_full():
    return devices.floquet_gaussian()


@pytest.fixture(scope="session")
def floquet_tlr():
    return devices.floquet_gaussian(pmr_kind="quarter_wave_tlr")


@pytest.fixture(scope="session")
def table1_point(table1_small):
    """Driven 6 GHz operating point on the short homogeneous line."""
    return operating_point(table1_small, 6.0)


@pytest.fixture(scope="session")
def table1_zero_pump(table1_small):
    p, ladder, _ = operating_point(table1_small, 6.0)
    pump = solve_pump(p, table1_small.pump_frequency_norm, 1e-12,
                      wavevector_mode=table1_small.wavevector_mode,
                      polynomial=table1_small.kp_polynomial)
    return p, ladder, pump
