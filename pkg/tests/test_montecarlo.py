"""Protocol simulation checks: selection logic, per-trial invariants,
estimator calibration against the closed forms, and reproducibility."""

import numpy as np
import pytest

from opprelay.analytic import RateSpec, outage_dfaf_sc
from opprelay.channel import NetworkSpec, PowerSpec, make_stream, network_link_snrs
from opprelay.montecarlo import (
    Combiner,
    Scheme,
    _combined_snr_block,
    _draw_block,
    estimate_curve,
    estimate_outage,
    estimate_outage_coupled,
    resolve_trial,
    run_trial,
    scale_power,
    wilson_interval,
)

RS = RateSpec(rate=1.0)
PW = PowerSpec.equal()
NET1 = NetworkSpec.rayleigh(1)
NET3 = NetworkSpec.from_shapes(0.5, [1, 1, 2], [1, 1, 1])


class TestWilson:
    def test_estimate_inside_interval(self):
        for fails, trials in [(0, 100), (1, 1000), (50, 100), (999, 1000)]:
            lo, hi = wilson_interval(fails, trials, 0.99)
            assert 0.0 <= lo <= fails / trials <= hi <= 1.0

    def test_extremes(self):
        lo, hi = wilson_interval(0, 10**6)
        assert lo == 0.0 and hi < 1e-4
        lo, hi = wilson_interval(10**6, 10**6)
        assert hi == 1.0 and lo > 0.9999

    def test_narrower_at_lower_confidence(self):
        lo99, hi99 = wilson_interval(10, 1000, 0.99)
        lo95, hi95 = wilson_interval(10, 1000, 0.95)
        assert hi95 - lo95 < hi99 - lo99

    def test_validation(self):
        with pytest.raises(ValueError):
            wilson_interval(1, 0)
        with pytest.raises(ValueError):
            wilson_interval(1, 10, confidence=1.0)


class TestResolveTrial:
    def test_all_zero_gains_is_outage(self):
        out = resolve_trial(0.0, (0.0, 0.0), (0.0, 0.0), RS, Scheme.DFAF)
        assert out.outage
        assert out.combined_snr == 0.0

    def test_deterministic_decode_path(self):
        out = resolve_trial(
            0.0, (10 * RS.delta,), (5 * RS.gamma_th,), RS, Scheme.DFAF, Combiner.SC
        )
        assert out.decoded == (True,)
        assert out.selected_index == 0
        assert out.combined_snr == 5 * RS.gamma_th
        assert not out.outage

    def test_all_decoded_reduces_to_df(self):
        rng = np.random.default_rng(17)
        for _ in range(200):
            k = 3
            g1 = tuple(RS.delta + float(x) for x in rng.uniform(0, 20, k))
            g2 = tuple(float(x) for x in rng.uniform(0, 20, k))
            g0 = float(rng.uniform(0, 5))
            adaptive = resolve_trial(g0, g1, g2, RS, Scheme.DFAF)
            df = resolve_trial(g0, g1, g2, RS, Scheme.DF)
            assert adaptive.selected_index == df.selected_index
            assert adaptive.combined_snr == df.combined_snr

    def test_no_decode_falls_back_to_direct(self):
        g1 = (RS.delta * 0.5, RS.delta * 0.1)
        g2 = (100.0, 200.0)
        out = resolve_trial(7.0, g1, g2, RS, Scheme.DF, Combiner.SC)
        assert out.combined_snr == 7.0
        out = resolve_trial(7.0, g1, g2, RS, Scheme.DF, Combiner.MRC)
        assert out.combined_snr == 7.0

    def test_no_relays_degenerates_to_direct(self):
        out = resolve_trial(2.0, (), (), RS, Scheme.DFAF, Combiner.SC)
        assert out.selected_index is None
        assert out.combined_snr == 2.0
        out = resolve_trial(2.0, (), (), RS, Scheme.AF, Combiner.MRC)
        assert out.combined_snr == 2.0

    def test_tie_breaks_to_lowest_index(self):
        out = resolve_trial(0.0, (10.0, 10.0), (5.0, 5.0), RS, Scheme.DFAF)
        assert out.selected_index == 0


@pytest.fixture(scope="module")
def outcomes():
    rng = make_stream(77, 0)
    power = scale_power(PW, 10.0)
    return [run_trial(NET3, power, RS, Scheme.DFAF, rng) for _ in range(2000)]


class TestRunTrialInvariants:

    def test_selection_maximizes_equivalent_snr(self, outcomes):
        for out in outcomes:
            best = out.equivalent_snr[out.selected_index]
            assert all(best >= v for v in out.equivalent_snr)

    def test_equivalent_snr_definition(self, outcomes):
        for out in outcomes:
            for g1, g2, xi, eq in zip(
                out.gamma1, out.gamma2, out.decoded, out.equivalent_snr
            ):
                expected = g2 if xi else g1 * g2 / (g1 + g2 + 1.0)
                assert eq == expected
                assert xi == (g1 >= RS.delta)

    def test_af_path_sandwich(self, outcomes):
        # af < min(g1, g2) always.  The half-min lower bound is asymptotic;
        # per trial it holds exactly when max >= min + 1 (algebra:
        # g1 g2 / (g1 + g2 + 1) >= min/2  <=>  max >= min + 1), so that is
        # the condition gated on here; positivity holds otherwise.
        for out in outcomes:
            for g1, g2 in zip(out.gamma1, out.gamma2):
                af = g1 * g2 / (g1 + g2 + 1.0)
                smaller, larger = min(g1, g2), max(g1, g2)
                assert af < smaller
                if larger >= smaller + 1.0:
                    assert af >= 0.5 * smaller
                else:
                    assert af > 0.0

    def test_outage_flag_consistent(self, outcomes):
        for out in outcomes:
            assert out.outage == (out.combined_snr < RS.gamma_th)


class TestSchemeDominancePerTrial:
    @pytest.mark.parametrize("combiner", [Combiner.SC, Combiner.MRC])
    def test_adaptive_dominates_on_shared_draws(self, combiner):
        rng = make_stream(78, 0)
        for _ in range(1000):
            g0 = float(rng.gamma(0.5, 20.0))
            g1 = tuple(float(x) for x in rng.gamma(1.0, 10.0, 3))
            g2 = tuple(float(x) for x in rng.gamma(1.0, 10.0, 3))
            adaptive = resolve_trial(g0, g1, g2, RS, Scheme.DFAF, combiner)
            df = resolve_trial(g0, g1, g2, RS, Scheme.DF, combiner)
            af = resolve_trial(g0, g1, g2, RS, Scheme.AF, combiner)
            assert adaptive.combined_snr >= df.combined_snr
            assert adaptive.combined_snr >= af.combined_snr


class TestBlockEngineAgainstScalarLogic:
    @pytest.mark.parametrize("scheme", list(Scheme))
    @pytest.mark.parametrize("combiner", list(Combiner))
    def test_vectorized_matches_per_trial(self, scheme, combiner):
        direct, relays = network_link_snrs(NET3, scale_power(PW, 10.0))
        g0, g1, g2 = _draw_block(direct, relays, seed=5, tag=(), block=0, n=400)
        combined = _combined_snr_block(g0, g1, g2, RS, scheme, combiner)
        for t in range(400):
            out = resolve_trial(
                float(g0[t]),
                tuple(float(x) for x in g1[:, t]),
                tuple(float(x) for x in g2[:, t]),
                RS,
                scheme,
                combiner,
            )
            assert combined[t] == out.combined_snr


class TestEstimators:
    def test_matches_closed_form_rayleigh(self):
        est = estimate_outage(
            NET1, scale_power(PW, 10.0), RS, Scheme.DFAF, 10**6, seed=42
        )
        exact = outage_dfaf_sc(NET1, PW, RS, 10.0)
        assert est.ci_low <= exact <= est.ci_high
        assert est.failures == round(est.probability * est.trials)

    def test_df_and_adaptive_agree_in_distribution(self):
        # independent runs, overlapping 99% intervals
        a = estimate_outage(
            NET1, scale_power(PW, 10.0), RS, Scheme.DFAF, 10**6, seed=1, stream_tag=(0,)
        )
        b = estimate_outage(
            NET1, scale_power(PW, 10.0), RS, Scheme.DF, 10**6, seed=1, stream_tag=(1,)
        )
        assert a.ci_low <= b.ci_high and b.ci_low <= a.ci_high

    def test_mrc_ordering_with_coupled_trials(self):
        coupled = estimate_outage_coupled(
            NET3,
            scale_power(PW, 10.0),
            RS,
            (Scheme.DFAF, Scheme.DF, Scheme.AF),
            10**6,
            seed=11,
            combiner=Combiner.MRC,
        )
        assert coupled.dominance_violations[Scheme.DF] == 0
        assert coupled.dominance_violations[Scheme.AF] == 0
        adaptive = coupled.estimates[Scheme.DFAF]
        assert adaptive.ci_high < coupled.estimates[Scheme.DF].ci_low
        assert adaptive.ci_high < coupled.estimates[Scheme.AF].ci_low

    def test_reproducible_same_seed(self):
        kwargs = dict(trials=100_000, seed=5)
        a = estimate_outage(NET1, scale_power(PW, 10.0), RS, Scheme.DFAF, **kwargs)
        b = estimate_outage(NET1, scale_power(PW, 10.0), RS, Scheme.DFAF, **kwargs)
        assert a == b

    def test_worker_count_does_not_change_counts(self):
        a = estimate_outage(
            NET1, scale_power(PW, 10.0), RS, Scheme.DFAF, 200_000, seed=5, workers=1
        )
        b = estimate_outage(
            NET1, scale_power(PW, 10.0), RS, Scheme.DFAF, 200_000, seed=5, workers=3
        )
        assert a.failures == b.failures

    def test_stream_tags_give_distinct_runs(self):
        a = estimate_outage(
            NET1, scale_power(PW, 10.0), RS, Scheme.DFAF, 10**5, seed=5, stream_tag=(0,)
        )
        b = estimate_outage(
            NET1, scale_power(PW, 10.0), RS, Scheme.DFAF, 10**5, seed=5, stream_tag=(1,)
        )
        assert a.failures != b.failures

    def test_minimum_trials_enforced(self):
        with pytest.raises(ValueError):
            estimate_outage(NET1, PW, RS, Scheme.DFAF, 999, seed=1)

    def test_coupled_needs_schemes(self):
        with pytest.raises(ValueError):
            estimate_outage_coupled(NET1, PW, RS, (), 10**4, seed=1)


class TestCurve:
    def test_grid_validation(self):
        with pytest.raises(ValueError):
            estimate_curve(NET1, PW, RS, Scheme.DFAF, [], 10**4, seed=1)
        with pytest.raises(ValueError):
            estimate_curve(NET1, PW, RS, Scheme.DFAF, [5.0, 5.0], 10**4, seed=1)

    def test_nonincreasing_within_ci(self):
        curve = estimate_curve(
            NET1, PW, RS, Scheme.DFAF, [0.0, 5.0, 10.0, 15.0], 10**5, seed=3
        )
        for (_, a), (_, b) in zip(curve, curve[1:]):
            assert b.ci_low <= a.ci_high  # allows CI noise only

    def test_relay_count_ordering_at_15db(self):
        estimates = {}
        for k in (1, 2, 3):
            net = NetworkSpec.rayleigh(k)
            estimates[k] = estimate_outage(
                net, scale_power(PW, 10.0 ** 1.5), RS, Scheme.DFAF,
                10**6, seed=13, stream_tag=(k,),
            )
        assert estimates[2].ci_high < estimates[1].ci_low
        assert estimates[3].ci_high < estimates[2].ci_low

    def test_matches_analytic_pointwise(self):
        grid = [0.0, 5.0, 10.0, 15.0]
        curve = estimate_curve(NET3, PW, RS, Scheme.DFAF, grid, 10**6, seed=2026)
        for snr_db, est in curve:
            exact = outage_dfaf_sc(NET3, PW, RS, 10.0 ** (snr_db / 10.0))
            assert est.ci_low <= exact <= est.ci_high

    def test_warns_on_few_failures(self):
        with pytest.warns(UserWarning, match="unreliable"):
            estimate_curve(NET1, PW, RS, Scheme.DFAF, [25.0], 2000, seed=4)
