"""Cross-module properties checked over seeded random draws.

These are the structural guarantees the package is built around: graphical
separation matching implied moments, the confounder cancellation that makes
the gain-score regression work, scale invariances, and the agreement between
the population algebra, the simulator, and the estimator.
"""
from __future__ import annotations

import io as stringio
import itertools
import math

import numpy as np
import pytest

import spillover_lab as sl
from spillover_lab import io as dataio
from _oracles import random_dag

ONE_SIDED = ("fig1a", "fig1b", "fig1c")
TWO_SIDED = ("fig2a", "fig2b", "fig2c")


def _random_preset(model_id: str, rng: np.random.Generator) -> tuple[sl.PathModel, dict]:
    """A preset re-parameterized with random nonzero coefficients."""
    params = {}
    for name in sl.preset_parameters(model_id):
        magnitude = rng.uniform(0.1, 2.0)
        params[name] = float(magnitude if rng.random() < 0.5 else -magnitude)
    return sl.preset_model(model_id, overrides=params), params


class TestGraphProperties:
    def test_enumerate_paths_deterministic(self):
        model = sl.preset_model("fig2b")
        first = sl.enumerate_paths(model, "T1", "D", include_closed_by_collider=True)
        for _ in range(3):
            again = sl.enumerate_paths(model, "T1", "D", include_closed_by_collider=True)
            assert again == first

    def test_d_separation_implies_zero_partial_correlation(self):
        rng = np.random.default_rng(515)
        checked = 0
        for _ in range(120):
            model = sl.build_model(random_dag(rng))
            names = model.names()
            if len(names) < 3:
                continue
            moments = sl.implied_covariance_matrix(model)
            for x, y in itertools.combinations(names, 2):
                others = [n for n in names if n not in (x, y)]
                k = int(rng.integers(0, len(others) + 1))
                given = tuple(sorted(rng.choice(others, size=k, replace=False))) if k else ()
                if sl.d_separated(model, x, y, given):
                    rho = sl.partial_correlation(moments, x, y, given)
                    assert abs(rho) < 1e-10, (x, y, given)
                    checked += 1
        assert checked > 50  # the draw actually exercised the property

    def test_sign_flip_preserves_path_status(self):
        rng = np.random.default_rng(516)
        models = [sl.preset_model(m) for m in sl.PRESETS]
        models += [sl.build_model(random_dag(rng)) for _ in range(40)]
        for model in models:
            flipped = model.with_coefficients(
                {(e.source, e.target): -e.coefficient for e in model.edges}
            )
            names = model.names()
            for x, y in itertools.combinations(names, 2):
                if "D" in (x, y):
                    continue
                before = sl.enumerate_paths(model, x, y, include_closed_by_collider=True)
                after = sl.enumerate_paths(flipped, x, y, include_closed_by_collider=True)
                assert [(p.nodes, p.status) for p in before] == \
                       [(p.nodes, p.status) for p in after]


class TestImpliedMomentProperties:
    @pytest.mark.parametrize("model_id", ONE_SIDED + TWO_SIDED)
    def test_confounder_cancellation(self, model_id):
        # The gain score minus its population regression on both exposures
        # must be uncorrelated with each exposure: every confounder route
        # cancels in the difference.
        rng = np.random.default_rng(601)
        for _ in range(25):
            model, params = _random_preset(model_id, rng)
            moments = sl.implied_covariance_matrix(model)
            b1 = params["theta"] - params["delta"]
            b2 = params["delta"] - params.get("kappa", 0.0)
            for t in ("T1", "T2"):
                resid_cov = (
                    moments.covariance("D", t)
                    - b1 * moments.covariance("T1", t)
                    - b2 * moments.covariance("T2", t)
                )
                assert abs(resid_cov) < 1e-10, (model_id, t, params)

    def test_noise_scale_invariance(self):
        for model_id in ONE_SIDED + TWO_SIDED:
            base = sl.population_partial_regression(sl.preset_model(model_id))
            for scale in (0.25, 4.0, 9.0):
                noises = {n: scale for n in ("U", "T1", "T2", "Y1", "Y2")}
                scaled = sl.population_partial_regression(
                    sl.preset_model(model_id, noise_variances=noises)
                )
                assert scaled.b1 == pytest.approx(base.b1, abs=1e-10)
                assert scaled.b2 == pytest.approx(base.b2, abs=1e-10)
                assert scaled.sc == pytest.approx(base.sc, abs=1e-10)

    @pytest.mark.parametrize("model_id", TWO_SIDED)
    def test_positive_reverse_spillover_underestimates(self, model_id):
        # With both spillovers positive, the population value sits strictly
        # below the direct effect.
        rng = np.random.default_rng(602)
        for _ in range(25):
            model, params = _random_preset(model_id, rng)
            positive = {name: abs(value) for name, value in params.items()}
            model = sl.preset_model(model_id, overrides=positive)
            reg = sl.population_partial_regression(model)
            assert reg.sc < positive["theta"], positive


class TestEstimatorProperties:
    @staticmethod
    def _sample(model_id="fig1a", n=4000, seed=11, **overrides):
        config = sl.preset_config(model_id, n_obs=n, master_seed=seed,
                                  overrides=overrides or None)
        return sl.simulate_sample(config)

    def test_sc_is_exactly_coefficient_sum(self):
        for seed in (1, 2, 3):
            report = sl.spillover_estimate(self._sample(seed=seed, n=800))
            assert report.sc == report.b1 + report.b2

    def test_common_outcome_shift_is_invisible(self):
        ds = self._sample(seed=21, n=1500)
        shifted = sl.PairDataset(
            family_id=ds.family_id, t1=ds.t1, t2=ds.t2,
            y1=ds.y1 + 7.25, y2=ds.y2 + 7.25,
        )
        a = sl.spillover_estimate(ds)
        b = sl.spillover_estimate(shifted)
        assert b.b1 == pytest.approx(a.b1, abs=1e-12)
        assert b.b2 == pytest.approx(a.b2, abs=1e-12)
        assert b.sc == pytest.approx(a.sc, abs=1e-12)

    def test_single_outcome_shift_moves_only_intercept(self):
        ds = self._sample(seed=22, n=1500)
        shifted = sl.PairDataset(
            family_id=ds.family_id, t1=ds.t1, t2=ds.t2,
            y1=ds.y1, y2=ds.y2 + 3.5,
        )
        a = sl.fit_gain_score(ds)
        b = sl.fit_gain_score(shifted)
        assert b.coefficients[0] == pytest.approx(a.coefficients[0] + 3.5, abs=1e-10)
        assert b.coefficients[1] == pytest.approx(a.coefficients[1], abs=1e-10)
        assert b.coefficients[2] == pytest.approx(a.coefficients[2], abs=1e-10)

    @pytest.mark.parametrize("model_id", ONE_SIDED)
    def test_structural_residual_uncorrelated_with_exposures(self, model_id):
        # D - (theta-delta)T1 - delta*T2 is pure sibling noise, so its sample
        # correlation with each exposure is at root-n scale.
        n = 20_000
        ds = self._sample(model_id, n=n, seed=33)
        resid = sl.gain_scores(ds) - (0.5 - 1.0) * ds.t1 - 1.0 * ds.t2
        for t in (ds.t1, ds.t2):
            corr = np.corrcoef(resid, t)[0, 1]
            assert abs(corr) < 3.0 / math.sqrt(n), (model_id, corr)


class TestSimulatorBridges:
    @pytest.mark.parametrize("model_id,target", [
        ("fig1a", 0.5), ("fig1b", 0.5), ("fig1c", 0.5),
        ("fig2a", 0.2), ("fig2b", 0.2), ("fig2c", 0.2),
    ])
    def test_mc_mean_hits_identified_target(self, model_id, target):
        config = sl.preset_config(model_id, n_obs=2000, n_reps=200, master_seed=31)
        s = sl.monte_carlo(config)
        mc_se = s.empirical_sd / math.sqrt(s.n_reps)
        assert abs(s.mean_sc - target) <= 4 * mc_se, (model_id, s.mean_sc, mc_se)

    @pytest.mark.parametrize("model_id", sl.PRESETS)
    def test_linear_mode_matches_population_value(self, model_id):
        # Every preset, biased ones included: the linear-gaussian simulator
        # and the implied-moments algebra must agree on what OLS converges to.
        population = sl.population_partial_regression(sl.preset_model(model_id)).sc
        config = sl.preset_config(model_id, n_obs=2000, n_reps=150, master_seed=37,
                                  exposure_mode=sl.LINEAR_MODE)
        s = sl.monte_carlo(config)
        mc_se = s.empirical_sd / math.sqrt(s.n_reps)
        assert abs(s.mean_sc - population) <= 4 * mc_se, (model_id, s.mean_sc, population)

    def test_spread_shrinks_with_root_n(self):
        small = sl.monte_carlo(sl.preset_config("fig1a", n_obs=1000, n_reps=400,
                                                master_seed=41))
        large = sl.monte_carlo(sl.preset_config("fig1a", n_obs=2000, n_reps=400,
                                                master_seed=43))
        ratio = small.empirical_sd / large.empirical_sd
        assert ratio == pytest.approx(math.sqrt(2.0), rel=0.15)


class TestAnalyzerProperties:
    def test_exposure_spillover_direction_immaterial(self):
        forward = sl.classify_identification(sl.preset_model("fig2c"), draws=50, seed=5)
        backward = sl.classify_identification(sl.preset_model("fig2b"), draws=50, seed=5)
        assert forward.classification == backward.classification == sl.DIFFERENCE_IDENTIFIED


class TestRoundTripEstimates:
    def test_csv_round_trip_preserves_estimates(self, tmp_path):
        config = sl.preset_config("fig2a", n_obs=1200, master_seed=19)
        ds = sl.simulate_sample(config)
        direct = sl.spillover_estimate(ds)

        path = tmp_path / "pairs.csv"
        buf = stringio.StringIO()
        dataio.write_pair_csv(ds, buf)
        path.write_text(buf.getvalue(), encoding="utf-8")
        reloaded = sl.spillover_estimate(dataio.load_pair_csv(str(path)))

        assert reloaded.sc == direct.sc
        assert reloaded.b1 == direct.b1
        assert reloaded.b2 == direct.b2
        assert reloaded.se == direct.se
