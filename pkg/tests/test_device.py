"""Device Hamiltonian: assembly, spectrum scans, avoided crossings."""

from dataclasses import replace

import numpy as np
import pytest

from triqec.device import (
    DeviceConfig,
    FluxMap,
    NoCrossingError,
    build_hamiltonian,
    calibrate_operating_point,
    config_from_dict,
    config_to_dict,
    default_config,
    dressed_states,
    find_avoided_crossing,
    flux_from_voltage,
    hamiltonian_eig,
    labeled_spectrum_scan,
    parse_state_label,
)
from triqec.transmon import ej_of_flux, flux_for_frequency, transmon_spectrum


@pytest.fixture(scope="module")
def cfg():
    return default_config()


def rescale_g(cfg, factor):
    return replace(cfg, transmons=tuple(replace(t, g=t.g * factor) for t in cfg.transmons))


class TestFluxMap:
    def test_identity_map(self):
        fm = FluxMap.diagonal(1.0)
        assert np.allclose(flux_from_voltage(fm, [0.1, 0, 0]), [0.1, 0, 0])

    def test_offsets(self):
        fm = FluxMap(FluxMap.diagonal(1.0).crosstalk, offsets=(0.3, -0.1, 0.0))
        assert np.allclose(flux_from_voltage(fm, [0, 0, 0]), [0.3, -0.1, 0.0])

    def test_off_diagonal_crosstalk(self):
        mat = ((1.0, 0.02, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))
        fm = FluxMap(mat)
        phi = flux_from_voltage(fm, [0, 1, 0])
        assert abs(phi[0] - 0.02) < 1e-15
        assert abs(phi[1] - 1.0) < 1e-15

    def test_singular_rejected(self):
        with pytest.raises(ValueError):
            FluxMap(((1, 0, 0), (1, 0, 0), (0, 0, 1)))


class TestConfig:
    def test_operating_point_hits_targets(self, cfg):
        for t, phi, f in zip(cfg.transmons, cfg.nominal_flux, (6.0, 7.0, 7.85)):
            omega, _ = transmon_spectrum(t, ej_of_flux(t.ejmax, phi))
            assert abs(omega[1] - f) < 1e-7

    def test_round_trip_serialization(self, cfg):
        doc = config_to_dict(cfg)
        back = config_from_dict(doc)
        assert back == cfg

    def test_t2_bound(self, cfg):
        with pytest.raises(ValueError):
            replace(cfg, t2=(5.0, 0.6, 1.3))

    def test_label_parsing(self):
        assert parse_state_label("102") == (1, 0, 2, 0)
        assert parse_state_label("0031") == (0, 0, 3, 1)
        with pytest.raises(ValueError):
            parse_state_label("10")


class TestHamiltonian:
    def test_hermitian(self, cfg):
        h = build_hamiltonian(cfg, cfg.nominal_flux)
        assert np.max(np.abs(h.matrix - h.matrix.conj().T)) < 1e-9

    def test_decoupled_limit_exact(self, cfg):
        zero = rescale_g(cfg, 1e-30)
        h = build_hamiltonian(zero, zero.nominal_flux)
        evals, _ = hamiltonian_eig(zero, zero.nominal_flux)
        bare = np.sort(np.diag(h.matrix).real)
        assert np.max(np.abs(np.sort(evals) - bare)) < 1e-9

    def test_dressed_single_excitations_near_targets(self, cfg):
        ds = dressed_states(cfg, cfg.nominal_flux, ["100", "010", "001", "0001"])
        targets = {"100": 6.0, "010": 7.0, "001": 7.85, "0001": 9.07}
        for lab, want in targets.items():
            assert abs(ds[lab][0] - want) < 0.1

    def test_label_overlap_away_from_crossings(self, cfg):
        sp = cfg.space()
        ds = dressed_states(cfg, cfg.nominal_flux, ["100", "010", "001", "110", "111"])
        for lab, (_, vec) in ds.items():
            idx = sp.basis_index(parse_state_label(lab))
            assert abs(vec[idx]) ** 2 > 0.9

    def test_truncation_convergence_below_9ghz(self, cfg):
        big = cfg.with_truncation(5, 3)
        labs = ["100", "010", "001"]
        d1 = dressed_states(cfg, cfg.nominal_flux, labs)
        d2 = dressed_states(big, big.nominal_flux, labs)
        for lab in labs:
            assert abs(d1[lab][0] - d2[lab][0]) < 1e-3

    def test_invalid_flux(self, cfg):
        with pytest.raises(ValueError):
            build_hamiltonian(cfg, [np.nan, 0.1, 0.1])


class TestSpectrumScan:
    def test_decoupled_scan_constant_labels(self, cfg):
        zero = rescale_g(cfg, 1e-30)
        spec = labeled_spectrum_scan(zero, 2, (0.25, 0.32), 11, ["010", "001"])
        assert not spec.ambiguous["010"].any()
        # the untouched qubit branch is flat, the swept one moves
        assert np.ptp(spec.energies["001"]) < 1e-9
        assert np.ptp(spec.energies["010"]) > 0.1

    def test_avoided_crossing_gap_equals_min_energy_difference(self, cfg):
        phi0 = flux_for_frequency(cfg.transmons[1], 7.48)
        spec = labeled_spectrum_scan(cfg, 2, (phi0 - 0.03, phi0 + 0.03), 31, ["011", "002"])
        phi_c, gap = find_avoided_crossing(spec, "011", "002")
        assert spec.flux_axis[0] < phi_c < spec.flux_axis[-1]
        assert gap <= spec.gap("011", "002").min() + 1e-12

    def test_111_102_crossing_in_window(self, cfg):
        # measured 67 MHz on the reference device; constants are approximate
        phi0 = flux_for_frequency(cfg.transmons[1], 7.48)
        spec = labeled_spectrum_scan(cfg, 2, (phi0 - 0.03, phi0 + 0.03), 31, ["111", "102"])
        _, gap = find_avoided_crossing(spec, "111", "102")
        assert 0.067 * 0.5 <= gap <= 0.067 * 1.5

    def test_102_003_crossing_in_window(self, cfg):
        phi0 = flux_for_frequency(cfg.transmons[0], 7.08)
        spec = labeled_spectrum_scan(cfg, 1, (phi0 - 0.03, phi0 + 0.03), 31, ["102", "003"])
        _, gap = find_avoided_crossing(spec, "102", "003")
        assert 0.121 * 0.5 <= gap <= 0.121 * 1.5

    def test_triple_manifold_offset_6ghz(self, cfg):
        # 111/102 pair sits one Q1 excitation (~6 GHz) above 011/002
        phi0 = flux_for_frequency(cfg.transmons[1], 7.48)
        lo = labeled_spectrum_scan(cfg, 2, (phi0 - 0.02, phi0 + 0.02), 21, ["011", "002"])
        hi = labeled_spectrum_scan(cfg, 2, (phi0 - 0.02, phi0 + 0.02), 21, ["111", "102"])
        offset = hi.energies["111"] - lo.energies["011"]
        assert np.all(np.abs(offset - 6.0) < 0.5)
        _, gap_lo = find_avoided_crossing(lo, "011", "002")
        _, gap_hi = find_avoided_crossing(hi, "111", "102")
        assert abs(gap_hi - gap_lo) < 0.2 * gap_lo

    def test_vacuum_rabi_and_g_scaling(self, cfg):
        # first-order qubit-cavity crossing: gap = 2g, halved when g -> g/2
        phi_res = flux_for_frequency(cfg.transmons[1], cfg.cavity_freq)
        spec = labeled_spectrum_scan(cfg, 2, (phi_res - 0.02, phi_res + 0.02), 21, ["010", "0001"])
        _, gap = find_avoided_crossing(spec, "010", "0001")
        assert abs(gap - 2 * cfg.transmons[1].g) < 0.05 * 2 * cfg.transmons[1].g
        half = rescale_g(cfg, 0.5)
        spec_h = labeled_spectrum_scan(half, 2, (phi_res - 0.02, phi_res + 0.02), 21, ["010", "0001"])
        _, gap_h = find_avoided_crossing(spec_h, "010", "0001")
        assert abs(gap / gap_h - 2.0) < 0.2

    def test_monotone_gap_reports_no_crossing(self, cfg):
        spec = labeled_spectrum_scan(cfg, 2, (0.29, 0.31), 11, ["010", "001"])
        with pytest.raises(NoCrossingError):
            find_avoided_crossing(spec, "010", "001")

    def test_unknown_branch(self, cfg):
        spec = labeled_spectrum_scan(cfg, 2, (0.29, 0.31), 5, ["010"])
        with pytest.raises(KeyError):
            find_avoided_crossing(spec, "010", "111")

    def test_parallel_scan_matches_serial(self, cfg):
        spec_s = labeled_spectrum_scan(cfg, 2, (0.26, 0.28), 9, ["011", "002"])
        spec_p = labeled_spectrum_scan(cfg, 2, (0.26, 0.28), 9, ["011", "002"], workers=4)
        for lab in ("011", "002"):
            assert np.array_equal(spec_s.energies[lab], spec_p.energies[lab])
