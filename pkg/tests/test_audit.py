import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fadecount.dyadic import decompose, floor_log2
from fadecount.mechanisms import (DOMAIN_INTERVAL, BaselineParams,
                                  ExpirationCounter, MechanismParams,
                                  RecordingNoise, SeededNoise)
from fadecount.privacy_audit import (CouplingReport, PrivacyLossCurve,
                                     baseline_loss_curve,
                                     closed_form_loss_bound, coupling_shift,
                                     empirical_loss_baseline,
                                     empirical_loss_curve,
                                     empirical_loss_expiration,
                                     exact_loss_bound, lower_bound_check,
                                     published_loss_bound, verify_coupling,
                                     worst_position_search_bound)


class TestPrivacyLossCurve:
    def test_envelope_is_running_max(self):
        curve = PrivacyLossCurve([0, 1, 2, 3], [1.0, 3.0, 2.0, 5.0])
        assert list(curve.envelope) == [1.0, 3.0, 3.0, 5.0]

    def test_envelope_at(self):
        curve = PrivacyLossCurve([0, 2, 4], [1.0, 3.0, 2.0])
        assert curve.envelope_at(0) == 1.0
        assert curve.envelope_at(1) == 1.0   # largest grid point <= 1
        assert curve.envelope_at(2) == 3.0
        assert curve.envelope_at(100) == 3.0
        with pytest.raises(ValueError):
            curve.envelope_at(-1)

    def test_validation(self):
        with pytest.raises(ValueError):
            PrivacyLossCurve([0, 0], [1.0, 1.0])      # not strictly increasing
        with pytest.raises(ValueError):
            PrivacyLossCurve([0, 1], [1.0, -1.0])     # negative loss
        with pytest.raises(ValueError):
            PrivacyLossCurve([], [])


class TestExactLossBound:
    def test_uniform_exponent_values(self):
        p = MechanismParams(0.5, 1.0, 0)
        # 2 * eps * (number of levels), levels = floor(log2(d+1)) + 1
        assert exact_loss_bound(0, p) == pytest.approx(1.0)
        assert exact_loss_bound(1, p) == pytest.approx(2.0)
        assert exact_loss_bound(7, p) == pytest.approx(4.0)
        assert exact_loss_bound(8, p) == pytest.approx(4.0)

    def test_weighted_exponent_values(self):
        p = MechanismParams(1.0, 3.0, 0)
        # weights (1+l)^2: d=7 -> levels 0..3 -> 2*(1+4+9+16) = 60
        assert exact_loss_bound(7, p) == pytest.approx(60.0)

    def test_delay_regime_is_free(self):
        p = MechanismParams(1.0, 1.0, 5)
        for d in range(5):
            assert exact_loss_bound(d, p) == 0.0
        assert exact_loss_bound(5, p) == pytest.approx(2.0)

    def test_delay_shifts_the_curve(self):
        a = MechanismParams(0.7, 2.0, 9)
        b = MechanismParams(0.7, 2.0, 0)
        for d in range(9, 200):
            assert exact_loss_bound(d, a) == exact_loss_bound(d - 9, b)


class TestClosedFormBound:
    def test_lambda_one(self):
        p = MechanismParams(1.0, 1.0, 0)
        # 2 * (1 + log2(n)) at lam=1
        assert closed_form_loss_bound(0, p) == pytest.approx(2.0)
        assert closed_form_loss_bound(3, p) == pytest.approx(2 * (1 + 2.0))

    def test_lambda_zero_limit(self):
        p0 = MechanismParams(1.0, 0.0, 0)
        # 2 * (1 + ln(log2(n) + 1))
        assert closed_form_loss_bound(3, p0) == pytest.approx(
            2 * (1 + math.log(3.0)))
        with pytest.raises(ValueError):
            closed_form_loss_bound(0, p0)  # n=1 undefined in the limit form

    def test_lambda_zero_is_continuous_limit(self):
        p0 = MechanismParams(1.0, 0.0, 0)
        p_eps = MechanismParams(1.0, 1e-9, 0)
        for d in (1, 5, 100, 999):
            assert closed_form_loss_bound(d, p0) == pytest.approx(
                closed_form_loss_bound(d, p_eps), rel=1e-5)

    def test_published_dominates_both(self):
        for lam in (0.0, 1.0, 2.0, 3.0):
            p = MechanismParams(0.3, lam, 0)
            for d in range(0, 300):
                pub = published_loss_bound(d, p)
                assert pub >= exact_loss_bound(d, p) - 1e-12
                if not (lam == 0.0 and d == 0):
                    assert pub >= closed_form_loss_bound(d, p) - 1e-12

    def test_closed_form_can_dip_below_exact(self):
        # the reason published_loss_bound takes a max: with the continuous
        # log2 the closed form undercuts the exact level sum near powers of
        # two once the level weights grow
        p2 = MechanismParams(1.0, 2.0, 0)
        dips = [d for d in range(1, 1000)
                if closed_form_loss_bound(d, p2) < exact_loss_bound(d, p2)]
        assert 3 in dips and dips  # e.g. n=4: closed 10 < exact 12
        # at uniform weights the continuous form dominates everywhere
        p1 = MechanismParams(1.0, 1.0, 0)
        assert all(closed_form_loss_bound(d, p1) >= exact_loss_bound(d, p1)
                   for d in range(1, 1000))


class TestEmpiricalLossExpiration:
    def test_uniform_exponent_small_d(self):
        p = MechanismParams(1.0, 1.0, 0)
        # worst-case interval counts of a length-(d+1) range
        for d, count in [(0, 1), (1, 2), (2, 2), (3, 3), (7, 4), (15, 5)]:
            assert empirical_loss_expiration(d, p, 4096) == pytest.approx(count)

    def test_matches_direct_maximization(self):
        for lam in (0.0, 1.0, 2.5):
            p = MechanismParams(0.8, lam, 0)
            for d in (0, 1, 5, 13, 64):
                direct = max(
                    sum((1 + iv.level) ** (lam - 1)
                        for iv in decompose(j, j + d)) * 0.8
                    for j in range(1, 513))
                assert empirical_loss_expiration(d, p, 512) == \
                    pytest.approx(direct)

    def test_delay_shifts(self):
        a = MechanismParams(1.0, 2.0, 6)
        b = MechanismParams(1.0, 2.0, 0)
        for d in range(6, 80):
            assert empirical_loss_expiration(d, a, 1024) == \
                empirical_loss_expiration(d - 6, b, 1024)
        for d in range(6):
            assert empirical_loss_expiration(d, a, 1024) == 0.0

    def test_bounded_by_exact(self):
        for lam in (0.0, 1.0, 2.0, 3.0):
            p = MechanismParams(1.0, lam, 0)
            for d in range(0, 200):
                assert empirical_loss_expiration(d, p, 2048) <= \
                    exact_loss_bound(d, p) + 1e-12

    def test_search_bound_suffices(self):
        # the worst position repeats with the decomposition's period; looking
        # past two periods finds nothing new
        p = MechanismParams(1.0, 2.0, 0)
        for d in (0, 3, 9, 21, 64, 200):
            bound = worst_position_search_bound(d, p)
            assert empirical_loss_expiration(d, p, bound) == \
                empirical_loss_expiration(d, p, 4 * bound)

    def test_search_bound_value(self):
        p = MechanismParams(1.0, 1.0, 0)
        assert worst_position_search_bound(0, p) == 4
        assert worst_position_search_bound(7, p) == 4 * 8
        assert worst_position_search_bound(8, p) == 4 * 8

    def test_curve_wrapper(self):
        p = MechanismParams(0.5, 1.0, 0)
        curve = empirical_loss_curve(p, np.arange(0, 32), 4096)
        assert len(curve.d) == 32
        for i, d in enumerate(range(32)):
            assert curve.loss[i] == empirical_loss_expiration(d, p, 4096)
        assert np.all(curve.envelope >= curve.loss)


class TestEmpiricalLossBaseline:
    def test_small_window_pinned_values(self):
        params = BaselineParams(4, 1.0, 0.1)
        expected = [1.0, 1.1, 1.1, 1.1, 1.1, 1.2, 1.2, 1.2, 1.2, 1.3, 1.3,
                    1.3, 1.3, 1.4, 1.4, 1.4, 1.4, 1.5]
        for d, want in enumerate(expected):
            assert empirical_loss_baseline(d, params, 10**6) == \
                pytest.approx(want)

    def test_analytic_branch_equals_maximization(self):
        # past the window length the per-position max becomes an arithmetic
        # progression; the shortcut must agree with the explicit search
        for w in (4, 8):
            params = BaselineParams(w, 1.0, 0.1)
            k = params.tree_depth
            for d in range(w, 6 * w):
                best = 0.0
                for s in range(1, w + 1):
                    reach = min(w, s + d)
                    tree = sum(1 for lvl in range(k)
                               if -(-s >> lvl) << lvl <= reach)
                    past = (s + d - 1) // w
                    best = max(best, tree / k + 0.1 * past)
                assert empirical_loss_baseline(d, params, 10**6) == \
                    pytest.approx(best)

    def test_monotone_in_d(self):
        params = BaselineParams(8, 0.7, 0.07)
        vals = [empirical_loss_baseline(d, params, 10**5)
                for d in range(0, 70)]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_fraction_arithmetic_is_exact(self):
        params = BaselineParams(127, Fraction(7197, 10000),
                                Fraction(7197, 100000))
        lo = empirical_loss_baseline(254, params, 4096)
        hi = empirical_loss_baseline(254 + 127, params, 4096)
        assert isinstance(hi - lo, Fraction)
        assert hi - lo == Fraction(7197, 100000)

    def test_horizon_limits_search(self):
        # with a single observable release the only position is s=1
        params = BaselineParams(8, 1.0, 0.1)
        k = params.tree_depth
        got = empirical_loss_baseline(0, params, horizon=1)
        assert got == pytest.approx(1.0 / k)

    def test_curve_wrapper(self):
        params = BaselineParams(8, 1.0, 0.1)
        curve = baseline_loss_curve(params, np.arange(0, 40), 10**4)
        for i, d in enumerate(range(40)):
            assert curve.loss[i] == empirical_loss_baseline(d, params, 10**4)


def record_run(params, xs, seed):
    rec = RecordingNoise(SeededNoise(seed))
    counter = ExpirationCounter(params, rec)
    outs = [counter.step(x) for x in xs]
    return outs, rec.ledger


class TestCouplingShift:
    def test_shift_targets_decomposition_of_changed_range(self):
        params = MechanismParams(0.5, 1.0, 0)
        xs = [1.0] * 40
        _, ledger = record_run(params, xs, seed=3)
        j, tau, y = 5, 40, 1.0
        shifted, report = coupling_shift(ledger, j, tau, y, params)
        moved = {key for key in ledger
                 if key[0] == DOMAIN_INTERVAL and shifted[key] != ledger[key]}
        expected = {(DOMAIN_INTERVAL, iv.level, iv.index)
                    for iv in decompose(j, tau)}
        assert moved == expected
        for key in moved:
            assert shifted[key] == ledger[key] - y
        # cost: |y| * eps * sum of weights over the 6 intervals of [5, 40]
        assert report.cost == pytest.approx(0.5 * 6)
        assert report.shift == y

    def test_cost_below_exact_bound(self):
        rng = np.random.default_rng(0)
        for _ in range(120):
            lam = float(rng.integers(0, 4))
            delay = int(rng.choice([0, 4, 16]))
            params = MechanismParams(0.5, lam, delay)
            tau = int(rng.integers(1, 257))
            j = int(rng.integers(1, tau + 1))
            if tau - delay < j:
                continue
            y = float(rng.uniform(-1, 1))
            _, ledger = record_run(params, [0.0] * tau, seed=int(rng.integers(1 << 16)))
            _, report = coupling_shift(ledger, j, tau - delay, y, params)
            assert report.cost <= exact_loss_bound(tau - j, params) + 1e-12


class TestVerifyCoupling:
    def test_identical_outputs_on_neighbors(self):
        params = MechanismParams(0.5, 2.0, 0)
        rng = np.random.default_rng(11)
        for _ in range(25):
            tau = int(rng.integers(2, 120))
            j = int(rng.integers(1, tau + 1))
            xs = rng.integers(0, 5, size=tau) / 4.0
            xs2 = xs.copy()
            xs2[j - 1] = (xs[j - 1] + rng.integers(1, 4) / 4.0) % 1.25
            if xs2[j - 1] > 1:
                xs2[j - 1] = 0.0
            if xs2[j - 1] == xs[j - 1]:
                continue
            report = verify_coupling(xs, xs2, j, tau, params, seed=7)
            assert report.outputs_identical
            assert report.cost <= exact_loss_bound(tau - j, params) + 1e-12

    def test_change_in_buffer_needs_no_shift(self):
        params = MechanismParams(1.0, 1.0, 8)
        xs = np.zeros(10)
        xs2 = xs.copy()
        xs2[9] = 1.0  # inside the delay buffer at tau=10
        report = verify_coupling(xs, xs2, 10, 10, params, seed=0)
        assert report.outputs_identical
        assert report.cost == 0
        assert report.shifted_intervals == []

    def test_rejects_non_neighbors(self):
        params = MechanismParams(1.0, 1.0, 0)
        xs = np.zeros(10)
        xs2 = xs.copy()
        xs2[2] = 1.0
        xs2[5] = 1.0
        with pytest.raises(ValueError):
            verify_coupling(xs, xs2, 3, 10, params, seed=0)

    def test_report_is_dataclass_with_fields(self):
        params = MechanismParams(1.0, 1.0, 0)
        xs = np.zeros(6)
        xs2 = xs.copy()
        xs2[1] = 1.0
        report = verify_coupling(xs, xs2, 2, 6, params, seed=1)
        assert isinstance(report, CouplingReport)
        assert report.shift == pytest.approx(1.0)
        assert len(report.shifted_intervals) == len(decompose(2, 6))


class TestLowerBound:
    def make_curve(self, eps, T):
        p = MechanismParams(eps, 1.0, 0)
        return empirical_loss_curve(p, np.arange(0, T), T)

    def test_holds_for_the_mechanism_curve(self):
        eps = 0.1
        curve = self.make_curve(eps, 1000)
        report = lower_bound_check(1000, 115, eps, curve)
        assert report
        assert report.lhs >= report.rhs

    def test_lhs_is_envelope_sum(self):
        eps = 0.2
        curve = self.make_curve(eps, 600)
        C = 40
        report = lower_bound_check(600, C, eps, curve)
        manual = sum(curve.envelope_at(j) for j in range(2 * C))
        assert report.lhs == pytest.approx(manual)

    def test_rhs_value_and_log_base(self):
        eps = 0.1
        curve = self.make_curve(eps, 1000)
        rep_e = lower_bound_check(1000, 100, eps, curve)
        assert rep_e.rhs == pytest.approx(math.log(1000 / 600) / eps)
        rep_2 = lower_bound_check(1000, 100, eps, curve, log_base="2")
        assert rep_2.rhs == pytest.approx(math.log2(1000 / 600) / eps)

    def test_validates_c_range(self):
        eps = 0.1
        curve = self.make_curve(eps, 100)
        with pytest.raises(ValueError):
            lower_bound_check(100, 0, eps, curve)
        with pytest.raises(ValueError):
            lower_bound_check(100, 50, eps, curve)

    def test_report_bool_reflects_inequality(self):
        # an artificial curve far too low must fail the check
        tiny = PrivacyLossCurve(np.arange(0, 100), np.full(100, 1e-9))
        report = lower_bound_check(100, 10, 0.1, tiny)
        assert not report
        assert report.lhs < report.rhs
