import itertools

import numpy as np
import pytest
from scipy.constants import speed_of_light

from simris.errors import CoincidentPoints
from simris.model import Architecture, simplified_channel, validate_layer
from simris.network import spectral_norm
from simris.optimize import ZeroPhase
from simris.propagation import (
    SimGeometry,
    build_stack,
    rayleigh_channel,
    rs_channel,
    rs_stages,
    trial_seed,
    upa_positions,
)

LAM = speed_of_light / 28e9


def geom(nx=4, ny=4):
    return SimGeometry.from_frequency(28e9, nx, ny)


class TestGeometry:
    def test_defaults(self):
        g = geom()
        assert g.wavelength == pytest.approx(LAM)
        assert g.layer_spacing == pytest.approx(LAM)
        assert g.element_spacing == pytest.approx(LAM / 2)
        assert g.first_layer_offset == pytest.approx(LAM)
        assert g.n == 16

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            SimGeometry(LAM, 4, 4, 0.0, LAM / 2, LAM)

    def test_single_element(self):
        np.testing.assert_allclose(upa_positions(geom(1, 1), 1), [[0, 0, LAM]])

    def test_pair_is_centered(self):
        p = upa_positions(geom(2, 1), 1)
        np.testing.assert_allclose(sorted(p[:, 0]), [-LAM / 4, LAM / 4])
        np.testing.assert_allclose(p[:, 1], 0)

    def test_4x4_min_distance(self):
        p = upa_positions(geom(), 1)
        d = [np.linalg.norm(a - b) for a, b in itertools.combinations(p, 2)]
        assert len(p) == 16
        assert min(d) == pytest.approx(LAM / 2)
        np.testing.assert_allclose(p.mean(axis=0)[:2], 0, atol=1e-18)

    def test_layer_planes(self):
        g = geom()
        for i in (1, 2, 3):
            np.testing.assert_allclose(upa_positions(g, i)[:, 2], i * LAM)


class TestRsChannel:
    def test_on_axis_one_wavelength(self):
        h = rs_channel([[0, 0, 0]], [[0, 0, LAM]], LAM)
        # A / lam * (1/(2 pi lam) - j/lam) * e^{j 2 pi} with A = lam^2 / 4
        assert h.shape == (1, 1)
        assert h[0, 0] == pytest.approx(0.039788735772973836 - 0.25j, rel=1e-12)

    def test_grazing_direction_vanishes(self):
        assert rs_channel([[0, 0, 0]], [[LAM, 0, 0]], LAM)[0, 0] == 0

    def test_coincident(self):
        with pytest.raises(CoincidentPoints):
            rs_channel([[0, 0, 0]], [[0, 0, 0]], LAM)

    def test_shape_maps_src_to_dst(self):
        h = rs_channel(np.zeros((1, 3)), upa_positions(geom(), 1), LAM)
        assert h.shape == (16, 1)

    def test_inter_layer_norm_below_one(self):
        g = geom()
        h = rs_channel(upa_positions(g, 1), upa_positions(g, 2), LAM)
        assert spectral_norm(h) < 1

    @pytest.mark.parametrize("ny", [1, 2, 4, 8, 16])
    def test_all_desk_sizes_contractive(self, ny):
        for stage in rs_stages(geom(4, ny), 3):
            assert spectral_norm(stage.h21) < 1

    def test_parallel_planes_are_reciprocal(self):
        g = geom(4, 2)
        a, b = upa_positions(g, 1), upa_positions(g, 3)
        np.testing.assert_allclose(rs_channel(a, b, LAM), rs_channel(b, a, LAM).T, atol=1e-12)

    @pytest.mark.parametrize("dx,dy", [(0.0, 0.0), (0.5, 0.0), (1.0, 0.0), (1.0, 1.0), (1.5, 1.5)])
    def test_decays_with_separation(self, dx, dy):
        # obliquity grows with separation until it exceeds the transverse offset
        rho = np.hypot(dx, dy) * LAM
        zs = np.linspace(max(LAM, rho), 10 * LAM, 200)
        mags = [abs(rs_channel([[0, 0, 0]], [[dx * LAM, dy * LAM, z]], LAM)[0, 0]) for z in zs]
        assert np.all(np.diff(mags) < 0)

    def test_large_offset_grows_first(self):
        z = np.array([1.0, 1.2]) * LAM
        mags = [abs(rs_channel([[0, 0, 0]], [[LAM, LAM, zz]], LAM)[0, 0]) for zz in z]
        assert mags[1] > mags[0]


class TestRayleigh:
    def test_deterministic(self):
        np.testing.assert_array_equal(rayleigh_channel(2, 5, 7), rayleigh_channel(2, 5, 7))

    def test_seeds_differ(self):
        assert not np.array_equal(rayleigh_channel(1, 4, 1), rayleigh_channel(1, 4, 2))

    def test_shape(self):
        assert rayleigh_channel(1, 16, 0).shape == (1, 16)

    def test_unit_power_and_circular(self):
        h = rayleigh_channel(1, 100_000, 2024).ravel()
        assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, abs=0.02)
        assert abs(np.mean(h)) < 0.02
        assert abs(np.mean(h ** 2)) < 0.02

    def test_trial_seed_substreams(self):
        assert trial_seed(5, 0, 1, 2) == trial_seed(5, 0, 1, 2)
        assert len({trial_seed(5, 0, 1, t) for t in range(50)}) == 50
        assert trial_seed(5, 0, 1, 2) != trial_seed(6, 0, 1, 2)


class TestBuildStack:
    def test_shapes(self):
        s = build_stack(geom(), 1, 1, "dris", seed=3)
        assert s.stages[0].h21.shape == (16, 1)
        assert s.receiver_stage.h21.shape == (1, 16)
        assert (s.m, s.k, s.num_layers) == (1, 1, 1)

    def test_three_layers_plane_offsets(self):
        g = geom()
        s = build_stack(g, 3, 1, "dris", seed=0, init=ZeroPhase())
        tx = np.zeros((1, 3))
        np.testing.assert_allclose(s.stages[0].h21, rs_channel(tx, upa_positions(g, 1), LAM))
        np.testing.assert_allclose(s.stages[2].h21, rs_channel(upa_positions(g, 2), upa_positions(g, 3), LAM))
        assert all(st.nonzero_blocks() == {} for st in s.stages)

    def test_seed_changes_only_receiver(self):
        a = build_stack(geom(), 2, 1, "dris", seed=1)
        b = build_stack(geom(), 2, 1, "dris", seed=2)
        for x, y in zip(a.stages, b.stages):
            np.testing.assert_array_equal(x.h21, y.h21)
        assert not np.array_equal(a.receiver_stage.h21, b.receiver_stage.h21)

    def test_layers_valid(self):
        for arch in ("dris", "bdris", "tree"):
            s = build_stack(geom(), 2, 1, arch, seed=0)
            assert all(layer.architecture is Architecture(arch) for layer in s.layers)
            assert all(validate_layer(layer) == [] for layer in s.layers)

    def test_zero_init(self):
        s = build_stack(geom(), 2, 1, "dris", seed=0, init=ZeroPhase())
        assert all(np.all(layer.phases == 0) for layer in s.layers)
        assert simplified_channel(s).shape == (1, 1)
