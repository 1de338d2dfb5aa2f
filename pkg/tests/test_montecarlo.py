import math

import numpy as np
import pytest
from scipy.stats import ks_2samp

from loewner_lab.drivers import make_driver
from loewner_lab.forward import trace
from loewner_lab.montecarlo import (
    DerivativeEvent,
    DriverSupEvent,
    IndeterminacyError,
    OscillationEvent,
    TubeEvent,
    _finish,
    admissible_zeta_sup,
    chi_square_energy,
    complement_arithmetic_bound,
    complement_bound_check,
    convergence_bound,
    derivative_moment,
    estimate_event,
    ldp_slope,
    oscillation_tail,
    pwl_convergence,
    write_mc_csv,
)

from helpers import random_pwl, sup_abs_brownian_tail


def geodesic(n):
    t = np.arange(n + 1) / n
    return trace(make_driver(np.zeros(n + 1), 1.0))


class TestEstimateEvent:
    def test_huge_tube_has_probability_one(self):
        ev = TubeEvent(target=geodesic(64), delta=10.0)
        res = estimate_event(ev, 0.5, 200, 64, seed=1)
        assert res.p_hat == 1.0
        assert res.kappa_log_p == 0.0

    def test_driver_sup_matches_reflection_series(self):
        # P(sup |B| >= a / sqrt(kappa)) via the alternating series oracle
        kappa, a, N, n = 0.25, 1.0, 20000, 2048
        res = estimate_event(DriverSupEvent(level=a), kappa, N, n, seed=3)
        want = sup_abs_brownian_tail(a / math.sqrt(kappa))
        assert abs(res.p_hat - want) <= 3 * res.se + 1e-12

    def test_deterministic_and_thread_invariant(self):
        ev = DriverSupEvent(level=1.0)
        r1 = estimate_event(ev, 0.5, 3000, 128, seed=9, threads=1)
        r8 = estimate_event(ev, 0.5, 3000, 128, seed=9, threads=8)
        assert r1 == r8
        assert r1.hits == estimate_event(ev, 0.5, 3000, 128, seed=9).hits

    def test_coupled_tube_monotone_in_delta(self):
        target = geodesic(128)
        ps = []
        for delta in (0.2, 0.4, 0.8):
            ev = TubeEvent(target=target, delta=delta)
            ps.append(estimate_event(ev, 0.3, 500, 128, seed=11).p_hat)
        assert ps[0] <= ps[1] <= ps[2]

    def test_complement_flag_flips(self):
        target = geodesic(64)
        a = estimate_event(TubeEvent(target, 0.4), 0.5, 400, 64, seed=2)
        b = estimate_event(TubeEvent(target, 0.4, complement=True), 0.5, 400, 64, seed=2)
        assert a.hits + b.hits == 400

    def test_tube_grid_mismatch_rejected(self):
        with pytest.raises(ValueError):
            estimate_event(TubeEvent(geodesic(32), 0.5), 0.5, 10, 64, seed=0)

    def test_zero_hits_gives_minus_inf(self):
        res = estimate_event(DriverSupEvent(level=50.0), 0.1, 200, 64, seed=5)
        assert res.hits == 0
        assert res.kappa_log_p == -math.inf

    def test_event_validation(self):
        with pytest.raises(ValueError):
            DriverSupEvent(level=-1.0)
        with pytest.raises(ValueError):
            OscillationEvent(delta=2.0, threshold=1.0)
        with pytest.raises(ValueError):
            DerivativeEvent(beta=1.5, n=2)

    def test_indeterminacy_budget_enforced(self):
        with pytest.raises(IndeterminacyError):
            _finish("x", 1.0, 1000, 10, 0, indet=5)


class TestMcCsv:
    def test_csv_format(self, tmp_path):
        res = estimate_event(DriverSupEvent(1.0), 0.5, 100, 64, seed=7)
        p = tmp_path / "mc.csv"
        write_mc_csv([res], p)
        lines = p.read_text().splitlines()
        assert lines[0] == "event,kappa,N,hits,p_hat,se,kappa_log_p,seed,indeterminate"
        cells = lines[1].split(",")
        assert cells[0] == "driver_sup(a=1)"
        assert int(cells[2]) == 100 and int(cells[7]) == 7


class TestLdpSlope:
    def test_geodesic_tube_rate_trends_to_zero(self):
        target = geodesic(128)
        rows = ldp_slope(TubeEvent(target, 0.5), [0.4, 0.2, 0.1], 400, 128, seed=13)
        # I(target) = 0: kappa log p must trend up toward 0 as kappa drops
        vals = [r["kappa_log_p"] for r in rows]
        assert vals[-1] >= vals[0] - 0.05
        assert vals[-1] > -0.2

    def test_zero_hit_row_flagged(self):
        rows = ldp_slope(DriverSupEvent(50.0), [0.2, 0.1], 100, 64, seed=1)
        assert rows[0]["kappa_log_p"] == -math.inf
        assert rows[0]["low_hits"]

    def test_kappa_list_must_decrease(self):
        with pytest.raises(ValueError):
            ldp_slope(DriverSupEvent(1.0), [0.1, 0.2], 10, 64, seed=0)
        with pytest.raises(ValueError):
            ldp_slope(DriverSupEvent(1.0), [], 10, 64, seed=0)


class TestChiSquareEnergy:
    def test_moments(self):
        m, N = 10, 20000
        stats = chi_square_energy(2.0, m, N, seed=21)
        assert abs(stats.mean - m) <= 3 * math.sqrt(2.0 * m / N)
        # Var chi2_m = 2m; sample variance of chi2 fluctuates with heavy tail
        assert abs(stats.variance - 2 * m) <= 5 * math.sqrt((8 * m + 48) * m / N)

    def test_kappa_invariance_ks(self):
        a = chi_square_energy(1.0, 10, 5000, seed=31)
        b = chi_square_energy(4.0, 10, 5000, seed=32)
        assert ks_2samp(a.samples, b.samples).pvalue > 0.01

    def test_same_seed_exact_cancellation(self):
        a = chi_square_energy(1.0, 10, 50, seed=33)
        b = chi_square_energy(4.0, 10, 50, seed=33)
        np.testing.assert_allclose(a.samples, b.samples, rtol=1e-12)


class TestOscillationTail:
    def test_huge_threshold_never_hit(self):
        res = oscillation_tail(1.0, 0.1, r=800.0, N=500, seed=41, n=256)
        assert res.mc.p_hat == 0.0
        assert res.passed

    def test_bound_satisfied_at_moderate_scale(self):
        res = oscillation_tail(1.0, 0.1, r=16.0, N=2000, seed=42, n=512)
        assert res.c0 == 8.0
        assert res.bound == pytest.approx(8.0 * 0.1**4)
        assert res.passed

    def test_monotone_in_r(self):
        ps = [
            oscillation_tail(4.0, 0.3, r=rr, N=1500, seed=43, n=512).mc.p_hat
            for rr in (16.0, 24.0, 32.0)
        ]
        assert ps[0] >= ps[1] >= ps[2]

    def test_r_must_exceed_c0(self):
        with pytest.raises(ValueError):
            oscillation_tail(1.0, 0.1, r=4.0, N=10, seed=0)


class TestComplementBound:
    def test_arithmetic_value(self):
        assert complement_arithmetic_bound(0.8, 0.4, 2) == pytest.approx(1.0 / 12.0)

    def test_divergent_at_kappa_geq_beta(self):
        assert complement_arithmetic_bound(0.8, 0.8, 2) == math.inf
        assert complement_arithmetic_bound(0.5, 1.0, 2) == math.inf

    def test_mc_check_small(self):
        res = complement_bound_check(0.8, 0.4, 2, N=300, seed=51, n_steps=256)
        assert res.bound_q == pytest.approx(1.0 / 12.0)
        assert res.bound_psi == pytest.approx(1.0 / 12.0 + 2.0 * 2.0 ** (-2.5))
        assert res.passed
        assert not res.flagged_divergent

    def test_mc_check_divergent_trivial_pass(self):
        res = complement_bound_check(0.5, 0.9, 2, N=100, seed=52, n_steps=256)
        assert res.flagged_divergent
        assert res.passed


class TestPwlConvergence:
    def test_admissible_zeta_interval(self):
        sup = admissible_zeta_sup(0.5)
        assert sup == pytest.approx(0.5 * (1 - math.sqrt(0.75)), rel=1e-12)
        with pytest.raises(ValueError):
            pwl_convergence(1.0, [8], 0.5, 0.1, 5, seed=0, fine=64)
        # zeta = 0.05 is admissible at beta = 0.5
        pwl_convergence(1.0, [8], 0.5, 0.05, 5, seed=0, fine=64)

    def test_full_resolution_coarsening_is_exact(self):
        rows = pwl_convergence(1.0, [64], 0.5, 0.05, 8, seed=61, fine=64)
        assert rows[0]["median_sup_error"] == 0.0

    def test_errors_shrink_with_n(self):
        rows = pwl_convergence(1.0, [8, 64], 0.5, 0.05, 40, seed=62, fine=256)
        assert rows[0]["median_sup_error"] > rows[1]["median_sup_error"]

    def test_bound_divergent_flag(self):
        rows = pwl_convergence(1.0, [8], 0.5, 0.05, 5, seed=63, fine=64)
        assert rows[0]["flagged_divergent"]
        assert rows[0]["bound"] == math.inf
        assert convergence_bound(8, 0.25, 0.5) < math.inf

    def test_n_must_divide_fine(self):
        with pytest.raises(ValueError):
            pwl_convergence(1.0, [7], 0.5, 0.05, 5, seed=0, fine=64)


class TestDerivativeMoment:
    def test_bounded_by_one(self):
        res = derivative_moment(2.0, 0.5, 1.0, N=800, n=256, seed=71)
        assert res.mean <= 1.0 + 3 * res.se

    def test_off_grid_time_rejected(self):
        with pytest.raises(ValueError):
            derivative_moment(2.0, 0.5, 0.3333, N=10, n=256, seed=0)


class TestDerivativeEventEstimate:
    def test_event_probability_moderate_kappa(self):
        ev = DerivativeEvent(beta=0.8, n=2)
        res = estimate_event(ev, 0.4, 300, 256, seed=81)
        # the Q constants are colossal: the bound should essentially always hold
        assert res.p_hat >= 0.99

    def test_psi_form_labels(self):
        ev = DerivativeEvent(beta=0.8, n=2, psi_form=True)
        assert "psi=1" in ev.label()
