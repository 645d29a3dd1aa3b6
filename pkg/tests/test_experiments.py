import numpy as np
import pytest

from randgsc import experiments as ex
from randgsc.gsc import mn_filter
from randgsc.metrics import snr_loss
from randgsc.reducers import Method, ReducerSpec
from randgsc.scenario import RngStream, ScenarioSpec, make_covariance_model, sample_training, split_channels

SMALL = ScenarioSpec(n=30, j=4, k=8)


def cfg(methods, **kw):
    kw.setdefault("scenario", SMALL)
    kw.setdefault("trials", 5)
    kw.setdefault("master_seed", 3)
    return ex.ExperimentConfig(methods=tuple(methods), **kw)


G = ReducerSpec(Method.GAUSSIAN, 4)
S = ReducerSpec(Method.SELECT, 4)
PC = ReducerSpec(Method.PC, 4)
MN = ReducerSpec(Method.MN)


class TestRunTrial:
    def setup_method(self):
        self.model, self.soi = make_covariance_model(SMALL, RngStream(1, (9,)))

    def test_clairvoyant(self):
        s = ex.run_trial(self.model, self.soi, ReducerSpec(Method.CLAIRVOYANT), 8, RngStream(1, (1,)))
        assert abs(s.loss - 1) < 1e-9 and s.r == 4

    def test_full_gaussian_equals_mn(self):
        rng = RngStream(1, (2,))
        a = ex.run_trial(self.model, self.soi, ReducerSpec(Method.GAUSSIAN, 8), 8, rng)
        b = ex.run_trial(self.model, self.soi, MN, 8, rng)
        assert a.loss == pytest.approx(b.loss, rel=1e-9)
        data = split_channels(self.soi, sample_training(self.model, 8, rng.child(ex.DATA)))
        assert b.loss == pytest.approx(snr_loss(mn_filter(self.soi, data.z, data.d), self.soi.v, self.model)[0],
                                       rel=1e-12)

    def test_deterministic(self):
        a = ex.run_trial(self.model, self.soi, G, 8, RngStream(1, (3,)))
        b = ex.run_trial(self.model, self.soi, G, 8, RngStream(1, (3,)))
        assert a == b


class TestDistribution:
    def test_one_row_per_method_plus_control(self):
        res = ex.loss_distribution(cfg([G, S, PC], trials=1))
        assert [r.method for r in res.rows] == ["gaussian", "select", "pc", "clairvoyant"]
        assert res.skipped == {}

    def test_bounds_and_distortion(self):
        res = ex.loss_distribution(cfg([G, S, PC, MN], trials=20))
        loss = np.array([r.loss for r in res.rows])
        assert np.all((loss > 0) & (loss <= 1 + 1e-10))
        assert res.max_distortion <= 1e-10
        np.testing.assert_allclose(res.losses("clairvoyant"), 1, atol=1e-9)

    def test_aggregate_recomputes(self):
        res = ex.loss_distribution(cfg([G, PC], trials=30))
        for m in ("gaussian", "pc"):
            vals = res.losses(m)
            agg = res.mean(m)
            assert agg.count == 30
            assert agg.mean_loss == pytest.approx(vals.mean(), abs=1e-12)
            assert agg.stderr_loss == pytest.approx(vals.std(ddof=1) / np.sqrt(30), abs=1e-12)
            assert agg.mean_loss_db == pytest.approx(res.losses(m, db=True).mean(), abs=1e-12)

    def test_seed_changes_output(self):
        a = ex.loss_distribution(cfg([G], trials=3, master_seed=1))
        b = ex.loss_distribution(cfg([G], trials=3, master_seed=2))
        assert a.rows[0].loss != b.rows[0].loss

    def test_workers_identical(self):
        c1 = cfg([G, S, PC, MN], trials=12)
        c2 = cfg([G, S, PC, MN], trials=12, workers=2)
        assert ex.loss_distribution(c1).rows == ex.loss_distribution(c2).rows

    def test_fixed_scenario(self):
        res = ex.loss_distribution(cfg([G], trials=20, redraw_scenario_per_trial=False))
        np.testing.assert_allclose(res.losses("clairvoyant"), 1, atol=1e-9)


class TestSingle:
    def test_no_control(self):
        res = ex.single(cfg([MN], trials=1))
        assert len(res.rows) == 1 and res.rows[0].r == 8 and res.rows[0].sweep_value == 8


class TestOmegaStudy:
    def test_smoke(self):
        res = ex.omega_study(cfg([G, S], trials=2, inner_realizations=1,
                                 redraw_scenario_per_trial=False))
        assert [(r.method, r.trial_index) for r in res.rows] == [
            ("gaussian", 1), ("gaussian", 2), ("select", 3), ("select", 4)]
        for r in res.rows:
            assert r.loss_db == pytest.approx(10 * np.log10(r.loss), abs=1e-12)

    def test_row_is_mean_over_inner(self):
        res = ex.omega_study(cfg([G, S], trials=1, inner_realizations=4,
                                 redraw_scenario_per_trial=False))
        assert len(res.rows) == 2
        assert 0 < res.rows[0].loss <= 1

    def test_rejects_other_methods(self):
        with pytest.raises(ValueError):
            ex.omega_study(cfg([G, PC]))


class TestSweeps:
    def test_sweep_r_meets_mn_at_k(self):
        res = ex.sweep_r(cfg([G, S, PC, MN], trials=6), [2, 4, 8])
        mn = res.losses("mn", 0)
        for m in ("gaussian", "select", "pc"):
            np.testing.assert_allclose(res.losses(m, 8), mn, rtol=1e-8)
        assert {a.sweep_value for a in res.aggregates if a.method == "gaussian"} == {2, 4, 8}
        assert res.mean("clairvoyant", 0).count == 6

    def test_sweep_r_bounds(self):
        with pytest.raises(ValueError):
            ex.sweep_r(cfg([G]), [9])

    def test_sweep_k_at_r_equals_mn(self):
        res = ex.sweep_k(cfg([G, S, MN], trials=6), [4, 6, 10])
        for m in ("gaussian", "select"):
            np.testing.assert_allclose(res.losses(m, 4), res.losses("mn", 4), rtol=1e-8)
        assert {r.k for r in res.rows if r.method == "mn"} == {4, 6, 10}

    def test_sweep_k_bounds(self):
        with pytest.raises(ValueError):
            ex.sweep_k(cfg([G]), [3])
        with pytest.raises(ValueError):
            ex.sweep_k(cfg([G]), [30])


def test_config_validation():
    with pytest.raises(ValueError):
        ex.ExperimentConfig(methods=())
    with pytest.raises(ValueError):
        ex.ExperimentConfig(methods=(G,), trials=0)


@pytest.mark.slow
def test_mn_competitive_only_for_small_k():
    # MN matches an R = J sketch when K is just above J, then falls behind and degrades as K grows
    spec = ScenarioSpec(n=100, j=10, k=40)
    res = ex.sweep_k(ex.ExperimentConfig(scenario=spec, methods=(ReducerSpec(Method.GAUSSIAN, 10), MN),
                                         trials=300, master_seed=11), [12, 30, 40, 80])

    def gap(k):
        a, b = res.mean("mn", k), res.mean("gaussian", k)
        return (a.mean_loss - b.mean_loss) / np.hypot(a.stderr_loss, b.stderr_loss)

    assert gap(12) > -2
    assert gap(40) < -5
    assert res.mean("mn", 80).mean_loss < res.mean("mn", 30).mean_loss
