"""Cell-matrix assembly invariants, resonator loading, and port boundaries."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmtwpa.coupling import (CellMatrices, PoleProximityError,
                             assemble_inverse_inductance, boundary_matrices,
                             capacitance_diagonal, constant_port,
                             linear_impedance_ohm, loss_rates, pmr_factor,
                             sign_metric, stepwise_port)
from mmtwpa.solver import transfer_matrix
from oracle_helpers import loaded_capacitance, one_cell_generator, scalar_wavevector


class TestResonatorLoading:
    def test_dc_unity_and_zero_at_resonance(self, table1_full):
        p = table1_full.profile
        assert pmr_factor(0.0, p) == pytest.approx(1.0)
        assert pmr_factor(p.omega_r, p) == pytest.approx(0.0, abs=1e-12)

    def test_even_in_frequency(self, table1_full):
        p = table1_full.profile
        w = p.from_ghz(5.0)
        assert pmr_factor(w, p) == pytest.approx(pmr_factor(-w, p), rel=1e-14)

    def test_pole_raises(self, table1_full):
        p = table1_full.profile
        with pytest.raises(PoleProximityError):
            pmr_factor(p.omega_rt, p)

    def test_diagonal_matches_scalar_form(self, table1_full):
        p = table1_full.profile
        ws = p.from_ghz(np.array([2.0, 6.0, 11.0]))
        got = capacitance_diagonal(ws, p, 0)
        ref = [loaded_capacitance(p, w, 0) for w in ws]
        assert np.allclose(got, ref, rtol=1e-13)

    def test_broadcast_shapes(self, table1_full):
        p = table1_full.profile
        w = p.from_ghz(6.0)
        assert np.isscalar(capacitance_diagonal(w, p, 3)) or \
            np.ndim(capacitance_diagonal(w, p, 3)) == 0
        out = capacitance_diagonal(np.array([w, 2 * w]), p, np.arange(5))
        assert out.shape == (5, 2)


class TestDistributedResonator:
    """Quarter-wave stub loading against its lumped counterpart."""

    def test_stub_zero_matches_lumped_zero(self, floquet_full, floquet_tlr):
        pt = floquet_tlr.profile
        stub_zero_hz = pt.tlr_phase_velocity / (4.0 * pt.tlr_length)
        lumped_zero_hz = floquet_full.profile.to_hz(floquet_full.profile.omega_r)
        assert stub_zero_hz == pytest.approx(8.1784e9, rel=1e-4)
        assert abs(stub_zero_hz / lumped_zero_hz - 1.0) < 1e-3

    def test_center_cell_agreement_below_10ghz(self, floquet_full, floquet_tlr):
        # < 1% everywhere below 10 GHz outside the stopband window where
        # both loading factors swing through their pole/zero structure
        pl, pt = floquet_full.profile, floquet_tlr.profile
        cell = pl.length_cells // 2
        for f in np.arange(0.5, 10.01, 0.0625):
            if 7.9 < f < 8.35:
                continue
            cl = float(capacitance_diagonal(pl.from_ghz(f), pl, cell))
            ct = float(capacitance_diagonal(pt.from_ghz(f), pt, cell))
            assert abs(ct - cl) / abs(cl) < 1e-2, f"disagreement at {f} GHz"

    def test_all_cells_agreement_below_7p5ghz(self, floquet_full, floquet_tlr):
        # the constant C_c * Z product pins the distributed pole at the
        # full-coupler position; weakly coupled end cells drift, but stay
        # inside the gate below 7.5 GHz
        pl, pt = floquet_full.profile, floquet_tlr.profile
        for cell in (0, 500, 1000, 1500, 1999):
            for f in np.arange(0.5, 7.51, 0.125):
                cl = float(capacitance_diagonal(pl.from_ghz(f), pl, cell))
                ct = float(capacitance_diagonal(pt.from_ghz(f), pt, cell))
                assert abs(ct - cl) / abs(cl) < 1e-2, \
                    f"disagreement at {f} GHz, cell {cell}"

    def test_tan_pole_raises(self, floquet_tlr):
        pt = floquet_tlr.profile
        f_pole = pt.tlr_phase_velocity / (4.0 * pt.tlr_length)
        with pytest.raises(PoleProximityError):
            capacitance_diagonal(pt.from_ghz(f_pole / 1e9), pt, 1000)


@pytest.fixture(scope="module")
def cells(table1_point):
    p, ladder, pump = table1_point
    return CellMatrices(p, ladder, pump)


class TestAssemblyInvariants:

    def test_k22_is_minus_k11(self, cells):
        m = cells.ladder.m
        k = cells.k_cell
        assert np.max(np.abs(k[:, m:, m:] + k[:, :m, :m])) == 0.0

    def test_k21_adjoint_dressed_by_sign_metric(self, cells):
        # with negative-frequency rungs the adjoint picks up the commutator
        # metric: K21 = J K12^dag J; the positive sector obeys the plain form
        m = cells.ladder.m
        j = np.diag(cells.ladder.signs.astype(float))
        for cell in (0, cells.length_cells - 1):
            k12 = cells.k_cell[cell, :m, m:]
            k21 = cells.k_cell[cell, m:, :m]
            assert np.max(np.abs(k21 - j @ k12.conj().T @ j)) < 1e-12
            pos = cells.ladder.signs > 0
            sub = np.ix_(pos, pos)
            assert np.max(np.abs(k21[sub] - k12[sub].conj().T)) < 1e-12

    def test_inverse_inductance_hermitian(self, table1_point):
        p, ladder, pump = table1_point
        for x in (0.25, 7.9, 33.3):
            linv = assemble_inverse_inductance(x, ladder, pump, p)
            assert np.max(np.abs(linv - linv.conj().T)) < 1e-12

    def test_matches_scalar_assembly(self, table1_point):
        p, ladder, pump = table1_point
        k_ref = one_cell_generator(p, ladder, pump, cell=0)
        cells = CellMatrices(p, ladder, pump)
        assert np.max(np.abs(cells.k_cell[0] - k_ref)) < 1e-12

    def test_diagonal_is_linear_dispersion_at_zero_pump(self, table1_zero_pump):
        p, ladder, pump = table1_zero_pump
        cells = CellMatrices(p, ladder, pump)
        k11 = cells.k_cell[0, :ladder.m, :ladder.m]
        for slot, w in enumerate(ladder.frequencies):
            k_scalar = scalar_wavevector(p, float(w), 0)
            assert np.imag(k11[slot, slot]) == pytest.approx(k_scalar, rel=1e-6)

    def test_undriven_transfer_eigenvalues_on_unit_circle(self, table1_zero_pump):
        p, ladder, pump = table1_zero_pump
        pi = transfer_matrix(p, ladder, pump)
        assert np.max(np.abs(np.abs(np.linalg.eigvals(pi)) - 1.0)) < 1e-9

    def test_loss_rates(self, table1_point):
        _, ladder, _ = table1_point
        g = loss_rates(ladder, 2e-3)
        assert np.allclose(g, np.abs(np.concatenate(
            [ladder.frequencies, ladder.frequencies])) * 2e-3)
        assert np.array_equal(sign_metric(ladder), np.concatenate(
            [ladder.signs, ladder.signs]))

    def test_linear_impedance_anchor(self, table1_point):
        p, ladder, _ = table1_point
        z = linear_impedance_ohm(p, ladder, 0)
        assert z[ladder.signal_slot] == pytest.approx(37.485, rel=1e-4)


class TestPorts:
    def test_matched_boundary_is_identity(self):
        bm = boundary_matrices(np.array([50.0, 70.0]), np.array([50.0, 70.0]))
        assert np.allclose(bm.bc11, np.ones(2))
        assert np.allclose(bm.bc12, np.zeros(2))

    def test_two_to_one_ratio_entries(self):
        bm = boundary_matrices(np.array([2.0]), np.array([1.0]))
        root2 = np.sqrt(2.0)
        assert bm.bc11[0] == pytest.approx((root2 + 1.0 / root2) / 2.0, rel=1e-12)
        assert bm.bc12[0] == pytest.approx((1.0 / root2 - root2) / 2.0, rel=1e-12)

    def test_constant_port(self):
        port = constant_port(50.0)
        assert port(3e9) == 50.0
        assert port(40e9) == 50.0

    @given(f=st.floats(1e8, 40e9))
    @settings(max_examples=40, deadline=None)
    def test_stepwise_port_property(self, f):
        port = stepwise_port(50.0, 1000.0, 16e9)
        assert port(f) == (50.0 if f <= 16e9 else 1000.0)
