"""Preconfigured device bundles and the distributed-resonator variant."""

import numpy as np
import pytest

from mmtwpa.devices import (DEVICE_BUILDERS, PUMP_FREQ_65GHZ_GHZ,
                            PUMP_FREQ_73GHZ_GHZ, conventional_65ghz,
                            conventional_73ghz, floquet_gaussian)
from mmtwpa.pump import KP_POLY_73GHZ


class TestBuilders:
    def test_registry(self):
        assert set(DEVICE_BUILDERS) == {"conventional_73ghz",
                                        "conventional_65ghz",
                                        "floquet_gaussian"}
        for name, builder in DEVICE_BUILDERS.items():
            assert builder().name.startswith(name.split("_")[0])

    def test_homogeneous_single_junction(self):
        b = conventional_73ghz()
        assert b.profile.length_cells == 2037
        assert b.pump_frequency_ghz == PUMP_FREQ_73GHZ_GHZ == 6.7450
        assert b.wavevector_mode == "fitted_polynomial"
        assert b.kp_polynomial == KP_POLY_73GHZ
        assert np.all(b.drive_profile == 0.52)
        assert b.spec.pmr_period == 3
        assert b.spec.junctions_per_cell == 1

    def test_homogeneous_two_junction(self):
        b = conventional_65ghz()
        assert b.profile.length_cells == 700
        assert b.pump_frequency_ghz == PUMP_FREQ_65GHZ_GHZ == 7.875
        assert np.all(b.drive_profile == 0.6)
        assert b.spec.junctions_per_cell == 2
        assert b.spec.pmr_period == 8

    def test_graded_gaussian(self):
        b = floquet_gaussian()
        assert b.profile.length_cells == 2000
        assert b.pump_frequency_ghz == 7.875
        assert b.wavevector_mode == "adiabatic_formula"
        assert b.drive_profile.max() == pytest.approx(0.6, rel=1e-5)
        assert b.drive_profile.min() == pytest.approx(0.0990416, rel=1e-5)
        # constant physical pump current: I_pn(x) I_0(x) uniform
        i_phys = b.drive_profile * np.atleast_1d(b.spec.critical_current_profile)
        assert np.ptp(i_phys) / i_phys[0] < 1e-12

    def test_loss_tangent_passthrough(self):
        b = conventional_73ghz(length_cells=16, loss_tangent=1.5e-3)
        assert b.profile.loss_tangent == 1.5e-3


class TestDistributedVariant:
    def test_geometry_frozen(self, floquet_tlr):
        p = floquet_tlr.profile
        assert p.pmr_kind == "quarter_wave_tlr"
        assert p.tlr_length == pytest.approx(3.9739e-3, rel=1e-4)
        assert p.tlr_phase_velocity == 1.3e8
        mid = p.length_cells // 2
        assert p.tlr_impedance[mid] == pytest.approx(78.766, rel=1e-3)
        assert p.tlr_impedance[0] == pytest.approx(477.17, rel=1e-3)

    def test_stub_per_cell(self, floquet_tlr):
        assert floquet_tlr.spec.pmr_period == 1

    def test_coupler_impedance_product_constant(self, floquet_tlr):
        p = floquet_tlr.profile
        product = p.coupling_cap_farad * p.tlr_impedance
        assert np.ptp(product) / product[0] < 1e-12

    def test_same_operating_point_as_lumped(self, floquet_full, floquet_tlr):
        assert floquet_tlr.pump_frequency_ghz == floquet_full.pump_frequency_ghz
        assert np.allclose(floquet_tlr.drive_profile, floquet_full.drive_profile)
