import math

import numpy as np
import pytest

from riscomp.channel import (
    C0,
    ChannelSpec,
    PathAngles,
    PathSet,
    RisGeometry,
    array_phase,
    sample_cascade_paths,
    sample_channel,
    sample_direct_paths,
    synthesize_composite_taps,
    synthesize_direct_taps,
    tap_kernel,
)
from riscomp.ofdm import OfdmSpec
from riscomp.rng import RandomStream

FC = 3e9
LAM = C0 / FC


def geom(rows=10, cols=10):
    return RisGeometry.from_wavelengths(rows, cols, 0.25, FC)


def single_path(delay, gain=1.0 + 0j, az=0.0, el=0.0):
    return PathSet(np.array([delay]), np.array([gain]), np.array([az]), np.array([el]), los_index=0)


def test_geometry_positions_row_major():
    g = RisGeometry(2, 3, 0.1, 0.2, FC)
    pos = g.positions()
    assert pos.shape == (6, 3)
    # element n = r * n_cols + c
    np.testing.assert_allclose(pos[4], [0.0, 0.0, 0.1])
    np.testing.assert_allclose(pos[0], [-0.1, 0.0, -0.1])
    assert np.all(pos[:, 1] == 0)


def test_geometry_validation():
    with pytest.raises(ValueError):
        RisGeometry(0, 3, 0.1, 0.1, FC)
    with pytest.raises(ValueError):
        RisGeometry(2, 2, 0.0, 0.1, FC)


class TestArrayPhase:
    def test_center_of_odd_array_is_zero(self):
        g = geom(3, 5)
        assert array_phase(g, 7, PathAngles(0.3, 0.1), PathAngles(-1.0, 0.2)) == 0.0

    def test_broadside_is_zero_everywhere(self):
        g = geom(4, 4)
        assert all(array_phase(g, n, PathAngles(0, 0), PathAngles(0, 0)) == 0.0 for n in range(16))

    def test_hand_evaluated_endfire(self):
        g = RisGeometry(1, 2, LAM / 4, LAM / 4, FC)
        a = PathAngles(math.pi / 2, 0.0)
        assert array_phase(g, 0, a, a) == pytest.approx(-math.pi / 2)
        assert array_phase(g, 1, a, a) == pytest.approx(math.pi / 2)

    def test_index_out_of_range(self):
        with pytest.raises(IndexError):
            array_phase(geom(2, 2), 4, PathAngles(0, 0), PathAngles(0, 0))


class TestPathSampling:
    def test_direct_delays_in_range(self):
        spec = ChannelSpec(geom(), L_d=100)
        p = sample_direct_paths(spec, RandomStream(1, 1))
        assert len(p) == 100 and p.los_index is None
        assert np.all((p.delays >= spec.tau_d) & (p.delays <= 2 * spec.tau_d))

    def test_direct_full_scale_range_example(self):
        # UE 30 m from the AP -> tau_d = 100 ns
        spec = ChannelSpec(geom(), ap_pos=(15.0, 40.0, 0.0), ue_pos=(15.0, 10.0, 0.0), L_d=100)
        assert spec.tau_d == pytest.approx(100e-9)
        p = sample_direct_paths(spec, RandomStream(0, 0))
        assert np.all((p.delays >= 100e-9) & (p.delays <= 200e-9))

    def test_single_direct_path(self):
        spec = ChannelSpec(geom(), L_d=1)
        p = sample_direct_paths(spec, RandomStream(2, 0))
        assert len(p) == 1 and spec.tau_d <= p.delays[0] <= 2 * spec.tau_d

    def test_direct_power_budget(self):
        spec = ChannelSpec(geom(), L_d=20, direct_rel_db=-20.0)
        budget = 0.01 * (spec.los_gain(spec.tau_a) * spec.los_gain(spec.tau_b)) ** 2
        s = RandomStream(3, 0)
        energy = [np.sum(np.abs(sample_direct_paths(spec, s).gains) ** 2) for _ in range(10_000)]
        assert np.mean(energy) == pytest.approx(budget, rel=0.02)

    def test_cascade_sizes_and_los_first(self):
        spec = ChannelSpec(geom(), L_a=101, L_b=51)
        pa, pb = sample_cascade_paths(spec, RandomStream(4, 0))
        assert (len(pa), len(pb)) == (101, 51)
        for p, tau1 in ((pa, spec.tau_a), (pb, spec.tau_b)):
            assert p.los_index == 0
            assert p.delays[0] == tau1
            assert np.all((p.delays[1:] >= tau1) & (p.delays[1:] <= 2 * tau1))
            assert np.all(np.abs(p.gains[0]) > np.abs(p.gains[1:]))

    def test_pure_los_cascade(self):
        spec = ChannelSpec(geom(), L_a=1, L_b=1)
        pa, pb = sample_cascade_paths(spec, RandomStream(5, 0))
        assert pa.azimuth[0] == spec.los_in.azimuth and pa.elevation[0] == spec.los_in.elevation
        assert pb.azimuth[0] == spec.los_out.azimuth and pb.elevation[0] == spec.los_out.elevation

    def test_angle_offsets_within_bounds(self):
        spec = ChannelSpec(geom(), L_a=11, L_b=11)
        s = RandomStream(6, 0)
        az, el = [], []
        for _ in range(1000):
            pa, _ = sample_cascade_paths(spec, s)
            az.append(pa.azimuth[1:] - spec.los_in.azimuth)
            el.append(pa.elevation[1:] - spec.los_in.elevation)
        az, el = np.degrees(np.concatenate(az)), np.degrees(np.concatenate(el))
        assert az.size == 10_000
        assert az.min() >= -40 and az.max() <= 40
        assert el.min() >= -10 and el.max() <= 10

    def test_rejects_nonpositive_delay(self):
        spec = ChannelSpec(geom(), ap_pos=(0.0, 0.0, 0.0))
        with pytest.raises(ValueError):
            sample_cascade_paths(spec, RandomStream(0, 0))


class TestTapSynthesis:
    ofdm = OfdmSpec(K=32, M=20, B=1e6)

    def test_on_grid_impulse_at_tap_zero(self):
        h = synthesize_direct_taps(single_path(1e-6), self.ofdm, f_c=1e6, lead=0)
        expected = np.zeros(32, complex)
        expected[0] = np.exp(-2j * np.pi * 1e6 * 1e-6)
        np.testing.assert_array_equal(h, expected)

    def test_on_grid_shift(self):
        paths = PathSet(np.array([1e-6, 4e-6]), np.array([1.0, 0.5j]), np.zeros(2), np.zeros(2))
        h = synthesize_direct_taps(paths, self.ofdm, f_c=0.0, lead=0)
        assert h[0] == 1.0 and h[3] == 0.5j
        assert np.count_nonzero(h) == 2

    def test_default_lead_centres_earliest_path_at_w(self):
        h = synthesize_direct_taps(single_path(2e-6, 1.0), self.ofdm, f_c=0.0)
        assert h[6] == 1.0 and np.count_nonzero(h) == 1

    def test_linearity(self):
        g1, g2 = 0.3 - 0.2j, -1.1 + 0.4j
        a = synthesize_direct_taps(PathSet(np.array([0.0, 2e-6]), np.array([g1, 0]), np.zeros(2), np.zeros(2)),
                                   self.ofdm, f_c=0.0)
        b = synthesize_direct_taps(PathSet(np.array([0.0, 2e-6]), np.array([0, g2]), np.zeros(2), np.zeros(2)),
                                   self.ofdm, f_c=0.0)
        both = synthesize_direct_taps(PathSet(np.array([0.0, 2e-6]), np.array([g1, g2]), np.zeros(2), np.zeros(2)),
                                      self.ofdm, f_c=0.0)
        np.testing.assert_allclose(both, a + b, atol=1e-15)

    def test_on_grid_energy_is_exact(self):
        rng = np.random.default_rng(0)
        g = rng.normal(size=5) + 1j * rng.normal(size=5)
        paths = PathSet(np.arange(5) * 1e-6, g, np.zeros(5), np.zeros(5))
        h = synthesize_direct_taps(paths, self.ofdm, f_c=0.0)
        assert np.sum(np.abs(h) ** 2) == pytest.approx(np.sum(np.abs(g) ** 2), rel=1e-14)

    @pytest.mark.parametrize("frac", [0.1, 0.25, 0.5, 0.77])
    def test_off_grid_energy(self, frac):
        paths = PathSet(np.array([0.0, frac * 1e-6]), np.array([0.0, 2.0 + 1j]), np.zeros(2), np.zeros(2))
        h = synthesize_direct_taps(paths, self.ofdm, f_c=0.0)
        assert np.sum(np.abs(h) ** 2) == pytest.approx(5.0, rel=0.01)
        assert np.count_nonzero(h) > 1

    def test_kernel_spill_rejected(self):
        with pytest.raises(ValueError):
            tap_kernel([10.5], n_taps=16, half_width=6)
        # leading lobes of an off-grid path need lead >= W
        with pytest.raises(ValueError):
            tap_kernel([0.5], n_taps=20, half_width=6, lead=0)

    def test_delay_normalisation_per_channel(self):
        # the same relative layout at a large absolute delay gives the same taps
        a = synthesize_direct_taps(PathSet(np.array([0.0, 1.3e-6]), np.array([1.0, 1.0]), np.zeros(2), np.zeros(2)),
                                   self.ofdm, f_c=0.0)
        b = synthesize_direct_taps(PathSet(np.array([5e-3, 5e-3 + 1.3e-6]), np.array([1.0, 1.0]), np.zeros(2),
                                            np.zeros(2)), self.ofdm, f_c=0.0)
        np.testing.assert_allclose(a, b, atol=1e-9)

    def test_composite_broadside_single_path(self):
        g = geom(2, 3)
        pa = single_path(1e-6, 0.5)
        pb = single_path(2e-6, 0.2j)
        V = synthesize_composite_taps(pa, pb, RisGeometry(2, 3, g.d_h, g.d_v, 1e6), self.ofdm)
        # f_c * (tau_a + tau_b) = 3 full cycles -> unit carrier phase
        expected = np.zeros(32, complex)
        expected[6] = 0.5 * 0.2j
        for row in V:
            np.testing.assert_allclose(row, expected, atol=1e-15)

    def test_composite_single_element_at_origin(self):
        g = RisGeometry(1, 1, LAM / 4, LAM / 4, FC)
        pa = single_path(1e-6, 0.5, az=0.7, el=0.1)
        pb = single_path(1e-6, 0.5, az=-0.3, el=-0.05)
        V = synthesize_composite_taps(pa, pb, g, self.ofdm)
        pa0 = single_path(1e-6, 0.5)
        np.testing.assert_array_equal(V, synthesize_composite_taps(pa0, single_path(1e-6, 0.5), g, self.ofdm))

    def test_composite_two_arrival_paths_hand_evaluated(self):
        g = RisGeometry(1, 2, LAM / 4, LAM / 4, FC)
        az = np.array([math.pi / 2, 0.2])
        pa = PathSet(np.array([1e-6, 3e-6]), np.array([1.0, 0.4 - 0.1j]), az, np.array([0.0, 0.1]), los_index=0)
        pb = single_path(1e-6, 0.5, az=-0.4)
        V = synthesize_composite_taps(pa, pb, g, self.ofdm)
        for n in range(2):
            expected = np.zeros(32, complex)
            for l in range(2):
                ph = array_phase(g, n, PathAngles(az[l], pa.elevation[l]), PathAngles(-0.4, 0.0))
                tau = pa.delays[l] + 1e-6
                expected[6 + round((tau - 2e-6) * 1e6)] += pa.gains[l] * 0.5 * np.exp(1j * ph) * np.exp(
                    -2j * np.pi * FC * tau)
            np.testing.assert_allclose(V[n], expected, rtol=1e-9, atol=1e-15)

    def test_origin_row_angle_invariant(self):
        g = geom(3, 3)
        spec = ChannelSpec(g, L_a=3, L_b=2)
        base_a, base_b = sample_cascade_paths(spec, RandomStream(9, 0))
        ofdm = OfdmSpec(K=32, M=spec.tap_count(10.5e6), B=10.5e6)
        s = RandomStream(9, 1)
        ref = None
        for _ in range(1000):
            pa = PathSet(base_a.delays, base_a.gains, s.uniform(-np.pi, np.pi, 3), s.uniform(-1.5, 1.5, 3), 0)
            pb = PathSet(base_b.delays, base_b.gains, s.uniform(-np.pi, np.pi, 2), s.uniform(-1.5, 1.5, 2), 0)
            row = synthesize_composite_taps(pa, pb, g, ofdm)[4]
            if ref is None:
                ref = row
            assert row.tobytes() == ref.tobytes()


def test_sampled_realization_shape_and_padding():
    spec = ChannelSpec(geom(4, 4))
    M = spec.tap_count(10.5e6)
    ofdm = OfdmSpec(K=64, M=M, B=10.5e6)
    ch = sample_channel(spec, ofdm, RandomStream(0, 0))
    assert ch.h_d.shape == (64,) and ch.V.shape == (16, 64)
    assert not np.any(ch.h_d[M:]) and not np.any(ch.V[:, M:])
    assert np.any(ch.V[:, :M])
