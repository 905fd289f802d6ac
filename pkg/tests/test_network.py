import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import chain_scattering, gram_norm
from simris.errors import DegenerateImpedance, DimensionMismatch, SingularInnerLoop
from simris.network import (
    PartitionedScattering,
    cascade,
    max_abs_diff,
    random_scattering,
    reflection_coefficients,
    solve_waves_oracle,
    source_wave,
    spectral_norm,
)

seeds = st.integers(0, 2**32 - 1)
ports = st.integers(1, 4)


def test_blocks_must_match_partition():
    with pytest.raises(DimensionMismatch):
        PartitionedScattering(np.zeros((2, 2)), np.zeros((2, 3)), np.zeros((2, 2)), np.zeros((2, 2)))


def test_from_full_roundtrip(rng):
    s = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    p = PartitionedScattering.from_full(s, 2)
    assert (p.n1, p.n2) == (2, 3)
    np.testing.assert_array_equal(p.full, s)


def test_blocks_are_read_only(rng):
    p = random_scattering(2, 2, rng=rng)
    with pytest.raises(ValueError):
        p.s11[0, 0] = 1.0


def test_random_scattering_is_reciprocal_with_target_norm(rng):
    p = random_scattering(3, 2, norm=0.9, rng=rng)
    assert p.is_reciprocal()
    assert spectral_norm(p.full) == pytest.approx(0.9, rel=1e-12)


class TestCascade:
    def test_through_line_on_the_left_is_identity(self, rng):
        q = random_scattering(1, 1, rng=rng)
        r = cascade(PartitionedScattering.through(1), q)
        assert max_abs_diff(r, q) == 0.0

    def test_no_inner_reflections(self, rng):
        p = random_scattering(2, 3, rng=rng, reciprocal=False)
        q = random_scattering(3, 2, rng=rng, reciprocal=False)
        p = PartitionedScattering(p.s11, p.s12, p.s21, np.zeros((3, 3)))
        q = PartitionedScattering(np.zeros((3, 3)), q.s12, q.s21, q.s22)
        r = cascade(p, q)
        np.testing.assert_allclose(r.s11, p.s11, atol=1e-15)
        np.testing.assert_allclose(r.s12, p.s12 @ q.s12, atol=1e-15)
        np.testing.assert_allclose(r.s21, q.s21 @ p.s21, atol=1e-15)
        np.testing.assert_allclose(r.s22, q.s22, atol=1e-15)

    def test_matches_oracle_on_4_ports(self, rng):
        p = random_scattering(2, 2, rng=rng)
        q = random_scattering(2, 2, rng=rng)
        assert max_abs_diff(cascade(p, q), solve_waves_oracle(p, q)) < 1e-10

    def test_dimension_mismatch(self, rng):
        with pytest.raises(DimensionMismatch):
            cascade(random_scattering(2, 3, rng=rng), random_scattering(2, 2, rng=rng))

    def test_lossless_resonance_is_singular(self):
        # open stub facing a short: Q11 P22 = 1, the loop never settles
        p = PartitionedScattering([[0.0]], [[1.0]], [[1.0]], [[1.0]])
        q = PartitionedScattering([[1.0]], [[0.0]], [[0.0]], [[0.0]])
        with pytest.raises(SingularInnerLoop):
            cascade(p, q)

    def test_single_scalar_loop_matches_geometric_series(self):
        # R21 = q21 p21 / (1 - p22 q11) for scalar two-ports
        p = PartitionedScattering([[0.1]], [[0.8]], [[0.7]], [[0.5]])
        q = PartitionedScattering([[-0.4]], [[0.6]], [[0.9]], [[0.2]])
        r = cascade(p, q)
        assert r.s21[0, 0] == pytest.approx(0.9 * 0.7 / (1 + 0.2))
        assert r.s11[0, 0] == pytest.approx(0.1 + 0.8 * -0.4 * 0.7 / 1.2)

    @given(seeds, ports, ports, ports)
    def test_equals_wave_oracle(self, seed, n1, n2, n3):
        rng = np.random.default_rng(seed)
        p = random_scattering(n1, n2, rng=rng)
        q = random_scattering(n2, n3, rng=rng)
        assert max_abs_diff(cascade(p, q), solve_waves_oracle(p, q)) < 1e-9

    @given(seeds, ports, ports, ports, ports)
    def test_associative(self, seed, n1, n2, n3, n4):
        rng = np.random.default_rng(seed)
        a = random_scattering(n1, n2, rng=rng)
        b = random_scattering(n2, n3, rng=rng)
        c = random_scattering(n3, n4, rng=rng)
        assert max_abs_diff(cascade(cascade(a, b), c), cascade(a, cascade(b, c))) < 1e-9

    @given(seeds, ports, ports, ports)
    def test_preserves_reciprocity(self, seed, n1, n2, n3):
        rng = np.random.default_rng(seed)
        r = cascade(random_scattering(n1, n2, rng=rng), random_scattering(n2, n3, rng=rng))
        assert r.is_reciprocal(1e-10)

    @given(seeds, ports, ports)
    def test_through_line_is_identity(self, seed, n1, n2):
        rng = np.random.default_rng(seed)
        p = random_scattering(n1, n2, rng=rng)
        assert max_abs_diff(cascade(p, PartitionedScattering.through(n2)), p) < 1e-15
        assert max_abs_diff(cascade(PartitionedScattering.through(n1), p), p) < 1e-15

    def test_lossless_networks_cascade_to_lossless(self, rng):
        from oracles import random_symmetric_unitary
        p = PartitionedScattering.from_full(random_symmetric_unitary(4, rng), 2)
        q = PartitionedScattering.from_full(random_symmetric_unitary(5, rng), 2)
        assert cascade(p, q).is_lossless(1e-10)


class TestWaveOracle:
    def test_through_line(self, rng):
        q = random_scattering(2, 3, rng=rng)
        assert max_abs_diff(solve_waves_oracle(PartitionedScattering.through(2), q), q) < 1e-14

    def test_pure_forward_transmission(self):
        z = [[0.0]]
        p = PartitionedScattering(z, z, [[1.0]], z)
        r = solve_waves_oracle(p, p)
        np.testing.assert_array_equal(np.abs(r.full), [[0, 0], [1, 0]])

    def test_six_ports_against_cascade(self, rng):
        p = random_scattering(2, 4, rng=rng)
        q = random_scattering(4, 2, rng=rng)
        assert max_abs_diff(cascade(p, q), solve_waves_oracle(p, q)) < 1e-10

    @given(seeds, ports, ports, ports)
    def test_agrees_with_chain_solver(self, seed, n1, n2, n3):
        rng = np.random.default_rng(seed)
        p = random_scattering(n1, n2, rng=rng, reciprocal=False)
        q = random_scattering(n2, n3, rng=rng, reciprocal=False)
        ref, _ = chain_scattering([(p.full, n1), (q.full, n2)])
        assert np.max(np.abs(solve_waves_oracle(p, q).full - ref)) < 1e-10


class TestTerminations:
    def test_matched(self):
        np.testing.assert_array_equal(reflection_coefficients([50.0, 50.0, 50.0]), np.zeros((3, 3)))

    def test_short(self):
        np.testing.assert_array_equal(reflection_coefficients([0.0, 0.0]), -np.eye(2))

    def test_double_reference(self):
        assert reflection_coefficients([100.0], 50.0)[0, 0] == pytest.approx(1 / 3)

    def test_reactive_load_has_unit_magnitude(self):
        g = reflection_coefficients([25j], 50.0)
        assert abs(g[0, 0]) == pytest.approx(1.0)

    def test_degenerate(self):
        with pytest.raises(DegenerateImpedance):
            reflection_coefficients([50.0, -50.0])

    def test_bad_reference(self):
        with pytest.raises(ValueError):
            reflection_coefficients([50.0], 0.0)


class TestSourceWave:
    def test_matched_halves_voltage(self):
        np.testing.assert_allclose(source_wave(np.zeros((2, 2)), [2.0, 4j]), [1.0, 2j])

    def test_open_circuit_launches_nothing(self):
        np.testing.assert_array_equal(source_wave(np.eye(3), [1.0, 2.0, 3.0]), np.zeros(3))

    def test_arithmetic(self):
        np.testing.assert_allclose(source_wave([[1 / 3]], [3.0]), [1.0])

    def test_mismatch(self):
        with pytest.raises(DimensionMismatch):
            source_wave(np.zeros((2, 2)), [1.0])


class TestSpectralNorm:
    def test_identity(self):
        assert spectral_norm(np.eye(5)) == pytest.approx(1.0, rel=1e-14)

    def test_diagonal(self):
        assert spectral_norm(np.diag([2.0, -3j])) == pytest.approx(3.0, rel=1e-14)

    def test_zero(self):
        assert spectral_norm(np.zeros((3, 4))) == 0.0

    def test_matches_gram_eigensolve(self, rng):
        m = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        assert spectral_norm(m) == pytest.approx(gram_norm(m), rel=1e-10)

    def test_rectangular(self, rng):
        m = rng.standard_normal((3, 9)) + 1j * rng.standard_normal((3, 9))
        assert spectral_norm(m) == pytest.approx(np.linalg.svd(m, compute_uv=False)[0], rel=1e-10)

    def test_power_iteration_branch(self, rng):
        m = rng.standard_normal((100, 90)) + 1j * rng.standard_normal((100, 90))
        assert spectral_norm(m) == pytest.approx(gram_norm(m), rel=1e-10)

    @given(seeds, st.integers(1, 6), st.integers(1, 6), st.integers(1, 6))
    def test_submultiplicative(self, seed, a, b, c):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((a, b)) + 1j * rng.standard_normal((a, b))
        y = rng.standard_normal((b, c)) + 1j * rng.standard_normal((b, c))
        assert spectral_norm(x @ y) <= spectral_norm(x) * spectral_norm(y) + 1e-12
