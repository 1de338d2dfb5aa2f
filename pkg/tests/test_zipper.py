import math

import numpy as np
import pytest

from loewner_lab.drivers import dirichlet_energy, make_driver
from loewner_lab.forward import Curve, trace
from loewner_lab.zipper import ZipperError, capacity_profile, zip_curve

from helpers import random_pwl


def roundtrip_error(driver, n=None):
    """sup |lambda - recovered| compared at the recovered capacity times."""
    rec = zip_curve(trace(driver)).driver
    t = rec.times()
    truth = np.interp(np.minimum(t, driver.horizon), driver.times(), driver.values)
    return float(np.max(np.abs(rec.values - truth)))


class TestZipCurve:
    def test_geodesic_polyline_recovers_zero_driver(self):
        n = 400
        t = np.arange(n + 1) / n
        curve = Curve(points=2j * np.sqrt(t), horizon=1.0)
        res = zip_curve(curve)
        assert np.max(np.abs(res.driver.values)) < 1e-12
        np.testing.assert_allclose(res.dts, 1.0 / n, rtol=5e-2)
        assert res.horizon == pytest.approx(1.0, rel=1e-12)

    def test_roundtrip_linear_driver(self):
        n = 1000
        t = np.arange(n + 1) / n
        d = make_driver(0.5 * t, 1.0)
        assert roundtrip_error(d) <= 5e-2

    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
    def test_roundtrip_random_finite_energy(self, seed):
        d = random_pwl(seed, 1000, 2.0)
        assert roundtrip_error(d) <= 5e-2

    def test_roundtrip_improves_with_resolution(self):
        errs = {}
        for n in (500, 2000):
            t = np.arange(n + 1) / n
            d = make_driver(np.interp(t, [0, 0.3, 0.8, 1.0], [0, 0.6, -0.4, 0.2]), 1.0)
            errs[n] = roundtrip_error(d)
        assert errs[500] / errs[2000] >= 1.5

    def test_single_point_curve_degenerate(self):
        res = zip_curve(Curve(points=np.array([0j]), horizon=0.0))
        assert res.driver is None
        assert res.horizon == 0.0
        assert len(res.dts) == 0

    def test_residual_is_roundoff(self):
        res = zip_curve(trace(random_pwl(7, 300, 1.5)))
        assert res.residual <= 1e-12

    def test_recovered_horizon_within_two_percent(self):
        d = random_pwl(11, 1000, 1.0)
        res = zip_curve(trace(d))
        assert abs(res.horizon - d.horizon) <= 0.02 * d.horizon

    def test_capacity_increments_positive_and_increasing(self):
        res = zip_curve(trace(random_pwl(13, 200, 1.0)))
        assert np.all(res.dts > 0)
        assert np.all(np.diff(res.capacity_times) > 0)

    def test_traces_never_fail_to_unzip(self):
        for seed in range(8):
            zip_curve(trace(random_pwl(seed + 100, 300, 2.0)))

    def test_non_simple_input_fails_with_step_index(self):
        # doubles back onto itself along the imaginary axis
        pts = np.array([0j, 1j, 0.5j])
        with pytest.raises(ZipperError) as err:
            zip_curve(Curve(points=pts, horizon=1.0))
        assert err.value.step >= 1

    def test_rejects_nonzero_start(self):
        with pytest.raises(ValueError):
            zip_curve(Curve(points=np.array([0.1 + 0j, 1j]), horizon=1.0))


class TestCapacityProfile:
    def test_vertical_slit_one_step(self):
        h = 0.6
        res = zip_curve(Curve(points=np.array([0j, h * 1j]), horizon=1.0))
        assert res.dts[0] == pytest.approx(h * h / 4)
        prof = capacity_profile(res)
        assert prof[-1][1] == pytest.approx(h * h / 2)

    def test_profile_matches_2t(self):
        res = zip_curve(trace(random_pwl(5, 150, 1.0)))
        for t, hcap in capacity_profile(res):
            assert hcap == pytest.approx(2 * t, rel=1e-12, abs=1e-15)

    def test_profile_strictly_increasing(self):
        res = zip_curve(trace(random_pwl(6, 150, 1.0)))
        times = [t for t, _ in capacity_profile(res)]
        assert np.all(np.diff(times) > 0)

    def test_zipped_geodesic_capacity(self):
        n = 1000
        t = np.arange(n + 1) / n
        res = zip_curve(Curve(points=2j * np.sqrt(t), horizon=1.0))
        assert abs(res.horizon - 1.0) <= 0.02
