import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loewner_lab.drivers import make_driver, sample_brownian_driver
from loewner_lab.forward import (
    Curve,
    build_chain,
    evaluate_centered_map,
    evaluate_derivative,
    evaluate_map,
    map_profile,
    read_curve_csv,
    reparam_distance,
    scaled_driver,
    sup_distance,
    trace,
    trace_many,
    write_curve_csv,
)
from loewner_lab.rng import mix

from helpers import exhaustive_reparam_distance, random_pwl


def zero_driver(n, T=1.0):
    return make_driver(np.zeros(n + 1), T)


class TestBuildChain:
    def test_midpoint_levels(self):
        chain = build_chain(make_driver([0, 0.4, 0.4], 1.0))
        np.testing.assert_allclose(chain.levels, [0.2, 0.4])
        assert chain.n_steps == 2

    def test_tip_of_single_step(self):
        d = make_driver([0, 0], 0.25)
        c = trace(d)
        assert c.points[1] == pytest.approx(2j * math.sqrt(0.25))


class TestEvaluateMap:
    def test_identity_at_time_zero(self):
        chain = build_chain(random_pwl(5, 32, 1.0))
        assert evaluate_map(chain, 0.0, 1 + 1j) == 1 + 1j

    def test_zero_driver_closed_form(self):
        # f_t(z) = sqrt(z^2 - 4t) for the zero driver, exactly in this scheme
        chain = build_chain(zero_driver(64))
        for t in (0.25, 0.5, 1.0):
            for z in (2j, 1 + 1j, -0.5 + 0.3j, 3 + 0.1j):
                want = complex(np.emath.sqrt(z * z - 4 * t))
                if want.imag < 0:
                    want = -want
                got = evaluate_map(chain, t, z)
                assert got == pytest.approx(want, rel=1e-12)

    def test_example_2i(self):
        chain = build_chain(zero_driver(100))
        assert evaluate_map(chain, 1.0, 2j) == pytest.approx(2j * math.sqrt(2), rel=1e-12)

    def test_centered_equals_plain_for_zero_driver(self):
        chain = build_chain(zero_driver(16))
        z = 0.3 + 0.7j
        assert evaluate_centered_map(chain, 1.0, z) == evaluate_map(chain, 1.0, z)

    def test_rejects_lower_half_plane(self):
        chain = build_chain(zero_driver(4))
        with pytest.raises(ValueError):
            evaluate_map(chain, 1.0, 1 - 1j)
        with pytest.raises(ValueError):
            evaluate_map(chain, 1.0, 1.0 + 0j)

    def test_rejects_off_grid_time(self):
        chain = build_chain(zero_driver(4))
        with pytest.raises(ValueError):
            evaluate_map(chain, 0.3, 1j)

    def test_image_stays_in_upper_half_plane(self):
        chain = build_chain(random_pwl(9, 64, 2.0))
        zs = np.array([0.1j, 1 + 0.5j, -2 + 0.05j, 0.5 + 2j])
        out = evaluate_map(chain, 1.0, zs)
        assert np.all(out.imag > 0)


class TestEvaluateDerivative:
    def test_identity_at_time_zero(self):
        chain = build_chain(random_pwl(5, 32, 1.0))
        assert evaluate_derivative(chain, 0.0, 2j) == 1.0

    def test_zero_driver_closed_form(self):
        chain = build_chain(zero_driver(50))
        got = evaluate_derivative(chain, 1.0, 2j)
        assert got == pytest.approx(1 / math.sqrt(2), rel=1e-12)

    @given(st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_matches_finite_difference(self, seed):
        # central-difference oracle at h = 1e-6 |z|, relative tolerance 1e-6
        d = random_pwl(seed, 64, 1.5)
        chain = build_chain(d)
        z = complex(0.3, 0.8)
        h = 1e-6 * abs(z)
        for t in (0.5, 1.0):
            fd = (evaluate_map(chain, t, z + h) - evaluate_map(chain, t, z - h)) / (2 * h)
            assert evaluate_derivative(chain, t, z) == pytest.approx(fd, rel=1e-6)

    def test_profile_matches_pointwise(self):
        d = random_pwl(3, 32, 1.0)
        chain = build_chain(d)
        z_at = d.values[1:] + 0.4j
        pts, der = map_profile(chain, z_at, with_derivative=True)
        for k in (1, 7, 32):
            t = k * d.dt
            assert pts[k - 1] == pytest.approx(evaluate_map(chain, t, z_at[k - 1]), rel=1e-12)
            assert der[k - 1] == pytest.approx(
                evaluate_derivative(chain, t, z_at[k - 1]), rel=1e-12
            )


class TestTrace:
    def test_zero_driver_exact(self):
        n = 1000
        c = trace(zero_driver(n))
        t = c.times()
        assert np.max(np.abs(c.points - 2j * np.sqrt(t))) < 1e-12

    def test_sqrt_driver_is_a_ray(self):
        # lambda(t) = c sqrt(t) forces a straight ray from the origin
        n = 1000
        t = np.arange(n + 1) / n
        c = trace(make_driver(np.sqrt(t), 1.0))
        k0 = n // 10
        args = np.angle(c.points[k0:])
        assert np.max(np.abs(args - np.median(args))) <= 1e-2
        # self-consistency across resolutions
        n2 = 2000
        t2 = np.arange(n2 + 1) / n2
        c2 = trace(make_driver(np.sqrt(t2), 1.0))
        args2 = np.angle(c2.points[n2 // 10 :])
        assert abs(np.median(args) - np.median(args2)) <= 1e-2

    def test_positive_imaginary_parts(self):
        c = trace(random_pwl(17, 256, 2.0))
        assert np.all(c.points[1:].imag > 0)

    def test_scaling_equivariance(self):
        d = random_pwl(21, 128, 1.0)
        a = 1.7
        c = trace(d)
        cs = trace(scaled_driver(d, a))
        assert cs.horizon == pytest.approx(a * a * d.horizon)
        np.testing.assert_allclose(cs.points, a * c.points, rtol=1e-12, atol=1e-12)

    def test_halving_dt_improves_linear_driver_error(self):
        # first-order scheme: halving dt should shrink the error by >= 1.8.
        # (For the zero driver the scheme is exact at the nodes, so the
        # factor is measured on a nonzero driver.)
        errs = {}
        for n in (512, 1024):
            t = np.arange(n + 1) / n
            d = make_driver(0.5 * t, 1.0)
            c = trace(d)
            n_ref = 8192
            t_ref = np.arange(n_ref + 1) / n_ref
            ref = trace(make_driver(0.5 * t_ref, 1.0))
            stride = n_ref // n
            errs[n] = np.max(np.abs(c.points - ref.points[::stride]))
        assert errs[512] / errs[1024] >= 1.8

    def test_trace_many_matches_single(self):
        d1 = random_pwl(31, 64, 1.0)
        d2 = random_pwl(32, 64, 2.0)
        pts, bad = trace_many(np.stack([d1.values, d2.values]), 1.0)
        assert not bad.any()
        np.testing.assert_allclose(pts[0], trace(d1).points, rtol=1e-12)
        np.testing.assert_allclose(pts[1], trace(d2).points, rtol=1e-12)


class TestCurveDistances:
    def test_sup_distance_examples(self):
        c = trace(random_pwl(2, 32, 1.0))
        assert sup_distance(c, c) == 0.0
        shifted = Curve(points=c.points + 0.1, horizon=c.horizon)
        assert sup_distance(c, shifted) == pytest.approx(0.1)
        assert sup_distance(shifted, c) == sup_distance(c, shifted)

    def test_sup_distance_rejects_mismatched_grids(self):
        a = trace(zero_driver(8))
        b = trace(zero_driver(16))
        with pytest.raises(ValueError):
            sup_distance(a, b)

    def test_reparam_identical(self):
        c = trace(random_pwl(4, 32, 1.0))
        assert reparam_distance(c, c) == 0.0

    def test_reparam_leq_sup(self):
        a = trace(random_pwl(5, 32, 1.0))
        b = trace(random_pwl(6, 32, 1.0))
        assert reparam_distance(a, b) <= sup_distance(a, b) + 1e-15

    def test_reparam_quotients_out_speed(self):
        # same polyline sampled at two speeds: within one grid-cell diameter
        t = np.linspace(0, 1, 17)
        fast = Curve(points=(t * 1j)[np.minimum((2 * np.arange(17)), 16)], horizon=1.0)
        slow = Curve(points=t * 1j, horizon=1.0)
        cell = np.max(np.abs(np.diff(fast.points)))
        assert reparam_distance(fast, slow) <= cell + 1e-12

    def test_vertical_segments_offset(self):
        h = np.linspace(0, 1, 6)
        a = Curve(points=h * 1j, horizon=1.0)
        b = Curve(points=0.2 + h * 1j, horizon=1.0)
        b = Curve(points=b.points - 0.2 * (h == 0), horizon=1.0)  # keep z0 = 0 for a only
        got = reparam_distance(a, b)
        oracle = exhaustive_reparam_distance(a.points, b.points)
        assert got == pytest.approx(oracle, abs=1e-12)
        assert got == pytest.approx(0.2, abs=1e-12)

    @given(st.integers(0, 5000))
    @settings(max_examples=20, deadline=None)
    def test_reparam_matches_exhaustive_oracle(self, seed):
        rng = np.random.default_rng(seed)
        a = Curve(points=rng.normal(size=5) + 1j * rng.random(5), horizon=1.0)
        b = Curve(points=rng.normal(size=6) + 1j * rng.random(6), horizon=1.0)
        assert reparam_distance(a, b) == pytest.approx(
            exhaustive_reparam_distance(a.points, b.points), abs=1e-12
        )


class TestCurveCsv:
    def test_round_trip_bit_exact(self, tmp_path):
        c = trace(sample_brownian_driver(0.5, 1.0, 61, seed=9))
        p = tmp_path / "c.csv"
        write_curve_csv(c, p)
        c2 = read_curve_csv(p)
        np.testing.assert_array_equal(c2.points, c.points)
        assert c2.horizon == c.horizon
        p2 = tmp_path / "c2.csv"
        write_curve_csv(c2, p2)
        assert p.read_bytes() == p2.read_bytes()

    def test_rejects_nonzero_start(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("t,re,im\n0,0.5,0\n1,0,1\n")
        with pytest.raises(ValueError):
            read_curve_csv(p)
