"""Split schemes, generalization-error estimation, and the delta ledger."""
from datetime import datetime, timezone

import numpy as np
import pytest

from gridcast.crossval import (SchemeParams, SplitPlan, TrialLedger, TrialRow,
                               dataset_size_sweep,
                               estimate_generalization_error, make_splits,
                               read_ledger_csv, run_delta_eps_experiment,
                               write_ledger_csv, write_size_sweep_csv)
from gridcast.errors import (SchemaMismatch, SizeExceedsWindow, TooFewSamples,
                             WindowOutOfRange)
from gridcast.features import DatasetView
from gridcast.gridstore import Series, TimeAxis
from gridcast.hpo import Dim, HPSpace
from gridcast.models import ModelSpec, fit, predict

T0 = datetime(2020, 1, 1, tzinfo=timezone.utc)


def tab_view(X, y):
    X = np.asarray(X, dtype=np.float64)
    names = tuple(f"x{j}" for j in range(X.shape[1]))
    series = Series(time=TimeAxis(T0, 86400, len(X)), name="power_mw", unit="MW",
                    values=np.asarray(y, dtype=np.float64))
    return DatasetView(kind="Average", y=series, feature_names=names, X_tab=X)


def pairs(plan):
    return [(train.tolist(), test.tolist()) for train, test in plan.iterations]


class TestSchemeParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            SchemeParams(scheme="jackknife")
        with pytest.raises(ValueError):
            SchemeParams(scheme="kfold", K=1)
        with pytest.raises(ValueError):
            SchemeParams(scheme="blocking", block_len=0)
        with pytest.raises(ValueError):
            SchemeParams(scheme="holdout", test_fraction=0.0)
        with pytest.raises(ValueError):
            SchemeParams(scheme="holdout", test_fraction=1.0)

    def test_shuffle_only_for_unordered_schemes(self):
        SchemeParams(scheme="holdout", shuffle=True)
        SchemeParams(scheme="kfold", shuffle=True)
        for scheme in ("expanding", "sliding", "blocking"):
            with pytest.raises(ValueError):
                SchemeParams(scheme=scheme, shuffle=True)

    def test_label(self):
        assert SchemeParams(scheme="kfold").label == "kfold"
        assert SchemeParams(scheme="kfold", shuffle=True).label == "kfold+shuffle"


class TestMakeSplits:
    def test_expanding_eight_rows_four_folds(self):
        plan = make_splits(8, SchemeParams(scheme="expanding", K=4))
        assert pairs(plan) == [([0, 1], [2, 3]),
                               ([0, 1, 2, 3], [4, 5]),
                               ([0, 1, 2, 3, 4, 5], [6, 7])]

    def test_sliding_eight_rows_four_folds(self):
        plan = make_splits(8, SchemeParams(scheme="sliding", K=4))
        assert pairs(plan) == [([0, 1], [2, 3]),
                               ([2, 3], [4, 5]),
                               ([4, 5], [6, 7])]

    def test_kfold_partition(self):
        plan = make_splits(10, SchemeParams(scheme="kfold", K=5))
        assert plan.n_iterations == 5
        tested = np.sort(np.concatenate([test for _, test in plan.iterations]))
        assert tested.tolist() == list(range(10))
        for train, test in plan.iterations:
            assert len(test) == 2 and len(train) == 8
            assert np.array_equal(np.sort(np.concatenate([train, test])),
                                  np.arange(10))

    def test_holdout_last_rows(self):
        plan = make_splits(100, SchemeParams(scheme="holdout"))
        (train, test), = plan.iterations
        assert train.tolist() == list(range(90))
        assert test.tolist() == list(range(90, 100))

    def test_holdout_rounds_test_size(self):
        plan = make_splits(10, SchemeParams(scheme="holdout", test_fraction=0.25))
        (_, test), = plan.iterations
        assert test.tolist() == [8, 9]   # round(2.5) banker-rounds to 2

    def test_holdout_shuffled(self):
        params = SchemeParams(scheme="holdout", shuffle=True, rng_seed=3)
        plan = make_splits(100, params)
        (train, test), = plan.iterations
        assert len(train) == 90 and len(test) == 10
        assert np.array_equal(np.sort(np.concatenate([train, test])),
                              np.arange(100))
        again = make_splits(100, params)
        assert np.array_equal(again.iterations[0][1], test)
        other = make_splits(100, SchemeParams(scheme="holdout", shuffle=True,
                                              rng_seed=4))
        assert not np.array_equal(other.iterations[0][1], test)

    def test_shuffled_kfold_differs_but_partitions(self):
        params = SchemeParams(scheme="kfold", K=4, shuffle=True, rng_seed=0)
        plan = make_splits(24, params)
        plain = make_splits(24, SchemeParams(scheme="kfold", K=4))
        assert not all(np.array_equal(a[1], b[1])
                       for a, b in zip(plan.iterations, plain.iterations))
        tested = np.sort(np.concatenate([t for _, t in plan.iterations]))
        assert np.array_equal(tested, np.arange(24))

    def test_blocking_keeps_blocks_whole(self):
        params = SchemeParams(scheme="blocking", block_len=7, test_fraction=0.3,
                              rng_seed=1)
        plan = make_splits(70, params)
        (train, test), = plan.iterations
        assert len(train) and len(test)
        assert np.array_equal(np.sort(np.concatenate([train, test])),
                              np.arange(70))
        test_set = set(test.tolist())
        for start in range(0, 70, 7):
            block = set(range(start, min(start + 7, 70)))
            assert block <= test_set or not (block & test_set)

    def test_blocking_deterministic_per_seed(self):
        params = SchemeParams(scheme="blocking", block_len=7, rng_seed=5)
        a = make_splits(70, params)
        b = make_splits(70, params)
        assert np.array_equal(a.iterations[0][1], b.iterations[0][1])

    def test_blocking_forces_both_sides(self):
        # tiny test fraction: some seeds draw no test block and must reassign
        for seed in range(30):
            params = SchemeParams(scheme="blocking", block_len=7,
                                  test_fraction=0.01, rng_seed=seed)
            plan = make_splits(28, params)
            (train, test), = plan.iterations
            assert len(train) and len(test)

    def test_order_preserving_schemes(self):
        for scheme in ("holdout", "expanding", "sliding"):
            params = SchemeParams(scheme=scheme, K=4)
            for train, test in make_splits(40, params).iterations:
                assert train.max() < test.min()

    def test_too_few_samples(self):
        with pytest.raises(TooFewSamples):
            make_splits(1, SchemeParams(scheme="holdout"))
        with pytest.raises(TooFewSamples):
            make_splits(10, SchemeParams(scheme="kfold", K=6))
        with pytest.raises(TooFewSamples):
            make_splits(5, SchemeParams(scheme="blocking", block_len=7))
        with pytest.raises(TooFewSamples):
            make_splits(2, SchemeParams(scheme="holdout", test_fraction=0.9))

    def test_fuzzed_plans_stay_valid(self):
        rng = np.random.default_rng(8)
        checked = 0
        for _ in range(400):
            n = int(rng.integers(4, 200))
            scheme = SCHEME_POOL[int(rng.integers(len(SCHEME_POOL)))]
            shuffle = bool(rng.integers(2)) and scheme in ("holdout", "kfold")
            params = SchemeParams(scheme=scheme, shuffle=shuffle,
                                  K=int(rng.integers(2, 9)),
                                  block_len=int(rng.integers(1, 11)),
                                  test_fraction=float(rng.uniform(0.05, 0.5)),
                                  rng_seed=int(rng.integers(1000)))
            try:
                plan = make_splits(n, params)
            except TooFewSamples:
                continue
            checked += 1
            for train, test in plan.iterations:
                assert len(train) and len(test)
                assert np.intersect1d(train, test).size == 0
                both = np.concatenate([train, test])
                assert both.min() >= 0 and both.max() < n
                if not shuffle and scheme in ("holdout", "expanding", "sliding"):
                    assert train.max() < test.min()
            if scheme == "kfold":
                tested = np.sort(np.concatenate(
                    [t for _, t in plan.iterations]))
                assert np.array_equal(tested, np.arange(n))
        assert checked > 200


SCHEME_POOL = ("holdout", "kfold", "expanding", "sliding", "blocking")


class TestEstimateGeneralizationError:
    def test_perfect_oracle_zero_error(self):
        rng = np.random.default_rng(0)
        X = rng.uniform(-1, 1, size=(60, 2))
        y = 2.0 * X[:, 0] - X[:, 1] + 1.0
        view = tab_view(X, y)
        plan = make_splits(60, SchemeParams(scheme="kfold", K=4))
        est = estimate_generalization_error(ModelSpec(family="linear"), view, plan)
        assert est.eps_hat <= 1e-9
        assert est.n_fits == 4 and len(est.fold_rmse) == 4

    def test_constant_mean_predictor_matches_sigma(self):
        rng = np.random.default_rng(1)
        n, sigma = 4000, 10.0
        X = rng.normal(size=(n, 2))
        y = 100.0 + rng.normal(0, sigma, size=n)
        view = tab_view(X, y)
        spec = ModelSpec(family="forest",
                         hyperparams={"n_trees": 1, "max_depth": 0,
                                      "bootstrap": False})
        plan = make_splits(n, SchemeParams(scheme="kfold", K=5))
        est = estimate_generalization_error(spec, view, plan)
        assert abs(est.eps_hat - sigma) <= 0.05 * sigma

    def test_holdout_equals_manual_fit(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(80, 3))
        y = X @ np.array([1.0, 0.5, -2.0]) + rng.normal(0, 0.3, size=80)
        view = tab_view(X, y)
        plan = make_splits(80, SchemeParams(scheme="holdout"))
        spec = ModelSpec(family="linear")
        est = estimate_generalization_error(spec, view, plan)
        train, test = plan.iterations[0]
        fitted = fit(spec, view, train)
        manual = float(np.sqrt(np.mean(
            (view.y.values[test] - predict(fitted, view, test)) ** 2)))
        assert est.eps_hat == pytest.approx(manual, rel=1e-12)
        assert est.fold_rmse == (est.eps_hat,)

    def test_fold_failure_annotated(self):
        X = np.random.default_rng(3).normal(size=(8, 2))
        view = tab_view(X, X[:, 0])
        plan = make_splits(8, SchemeParams(scheme="kfold", K=4))
        spec = ModelSpec(family="forest")   # min_leaf 5 needs >= 10 rows
        with pytest.raises(TooFewSamples, match="cv iteration 0"):
            estimate_generalization_error(spec, view, plan)


def stationary_view(n=300, seed=0, sigma=0.5):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 2))
    y = 40.0 + 3.0 * X[:, 0] - 2.0 * X[:, 1] + rng.normal(0, sigma, size=n)
    return tab_view(X, y)


GAM_SPACE = HPSpace((Dim("n_knots", "int", 4, 8),
                     Dim("lam", "log_float", 1e-2, 1e2)))


class TestDeltaExperiment:
    def test_fixed_hyperparams_identical_rows(self):
        view = stationary_view()
        ledger = run_delta_eps_experiment(
            "linear", HPSpace(), view, np.arange(240), np.arange(240, 300),
            SchemeParams(scheme="kfold", K=5), n_trials=4)
        eps_hats = {r.eps_hat for r in ledger.rows}
        eps_vals = {r.eps for r in ledger.rows}
        assert len(eps_hats) == 1 and len(eps_vals) == 1
        assert ledger.std_delta() == 0.0
        for r in ledger.rows:
            assert r.delta == r.eps - r.eps_hat
            assert r.seconds >= 0.0
        assert ledger.mean_seconds() > 0.0
        assert ledger.scheme == "kfold" and ledger.model == "linear"

    def test_validation_must_follow_train(self):
        view = stationary_view()
        with pytest.raises(WindowOutOfRange):
            run_delta_eps_experiment(
                "linear", HPSpace(), view, np.arange(0, 250),
                np.arange(240, 300), SchemeParams(scheme="kfold", K=5),
                n_trials=1)

    def test_paired_draws_across_schemes(self):
        view = stationary_view()
        train, val = np.arange(240), np.arange(240, 300)
        kf = run_delta_eps_experiment(
            "gam", GAM_SPACE, view, train, val,
            SchemeParams(scheme="kfold", K=4), n_trials=3, seed=11)
        ex = run_delta_eps_experiment(
            "gam", GAM_SPACE, view, train, val,
            SchemeParams(scheme="expanding", K=4), n_trials=3, seed=11)
        assert [r.hyperparams for r in kf.rows] == [r.hyperparams for r in ex.rows]
        assert [r.eps for r in kf.rows] == [r.eps for r in ex.rows]
        assert kf.rows[0].eps_hat != ex.rows[0].eps_hat

    def test_stationary_schemes_agree_within_noise(self):
        # each seed draws a fresh stationary dataset; the residual scheme
        # bias must hide inside that seed-to-seed noise
        train, val = np.arange(240), np.arange(240, 300)
        means = {"kfold": [], "expanding": []}
        for seed in range(5):
            view = stationary_view(seed=100 + seed)
            for scheme in means:
                ledger = run_delta_eps_experiment(
                    "gam", GAM_SPACE, view, train, val,
                    SchemeParams(scheme=scheme, K=6), n_trials=8, seed=seed)
                means[scheme].append(ledger.mean_delta())
        gap = abs(np.mean(means["kfold"]) - np.mean(means["expanding"]))
        pooled_se = float(np.hypot(np.std(means["kfold"], ddof=1),
                                   np.std(means["expanding"], ddof=1)) / np.sqrt(5))
        assert gap < 2.0 * max(pooled_se, 1e-12)


class TestLedger:
    def rows(self):
        return [TrialRow(0, {"lam": 1.0}, eps_hat=2.0, eps=3.0, seconds=0.1),
                TrialRow(1, {"lam": 2.0}, eps_hat=1.0, eps=4.0, seconds=0.3)]

    def test_aggregates(self):
        ledger = TrialLedger(model="gam", scheme="kfold", hpo="random",
                             rows=self.rows())
        assert ledger.deltas().tolist() == [1.0, 3.0]
        assert ledger.mean_delta() == 2.0
        assert ledger.std_delta() == pytest.approx(np.sqrt(2.0))
        assert ledger.mean_abs_delta() == 2.0
        assert ledger.delta_at_best() == 3.0   # trial 1 has the lower eps_hat
        assert ledger.mean_seconds() == pytest.approx(0.2)

    def test_single_row_std_zero(self):
        ledger = TrialLedger(model="gam", scheme="kfold", hpo="random",
                             rows=self.rows()[:1])
        assert ledger.std_delta() == 0.0

    def test_csv_round_trip(self, tmp_path):
        view = stationary_view()
        ledger = run_delta_eps_experiment(
            "gam", GAM_SPACE, view, np.arange(240), np.arange(240, 300),
            SchemeParams(scheme="sliding", K=4), n_trials=3, seed=2)
        path = tmp_path / "ledger.csv"
        write_ledger_csv(ledger, path)
        back = read_ledger_csv(path)
        assert back.model == "gam" and back.scheme == "sliding"
        assert back.hpo == "random"
        for a, b in zip(ledger.rows, back.rows):
            assert a.trial_id == b.trial_id
            assert a.eps_hat == b.eps_hat and a.eps == b.eps
            assert a.seconds == b.seconds
            assert a.hyperparams == b.hyperparams
        assert back.mean_delta() == ledger.mean_delta()

    def test_csv_rejects_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("trial,scheme\n0,kfold\n", encoding="utf-8")
        with pytest.raises(SchemaMismatch):
            read_ledger_csv(path)

    def test_csv_rejects_corrupted_delta(self, tmp_path):
        ledger = TrialLedger(model="gam", scheme="kfold", hpo="random",
                             rows=self.rows())
        path = tmp_path / "ledger.csv"
        write_ledger_csv(ledger, path)
        text = path.read_text(encoding="utf-8").replace("1.0,", "1.5,", 1)
        path.write_text(text, encoding="utf-8")
        with pytest.raises(SchemaMismatch):
            read_ledger_csv(path)

    def test_csv_rejects_empty_ledger(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text(",".join(["trial_id", "scheme", "hpo", "model",
                                  "eps_hat_mw", "eps_mw", "delta_mw",
                                  "seconds", "hyperparams_json"]) + "\n",
                        encoding="utf-8")
        with pytest.raises(SchemaMismatch):
            read_ledger_csv(path)


class TestSizeSweep:
    def test_full_window_matches_plain_run(self):
        view = stationary_view()
        train, val = np.arange(240), np.arange(240, 300)
        params = SchemeParams(scheme="kfold", K=5)
        sweep = dataset_size_sweep("gam", GAM_SPACE, view, [240], train, val,
                                   params, n_trials=4, seed=3)
        plain = run_delta_eps_experiment("gam", GAM_SPACE, view, train, val,
                                         params, n_trials=4, seed=3)
        assert sweep.rows[0].size == 240
        assert sweep.rows[0].mean_abs_delta == plain.mean_abs_delta()

    def test_more_data_does_not_hurt(self):
        view = stationary_view(seed=9)
        train, val = np.arange(240), np.arange(240, 300)
        sweep = dataset_size_sweep("gam", GAM_SPACE, view, [60, 240], train,
                                   val, SchemeParams(scheme="kfold", K=5),
                                   n_trials=8, seed=4)
        small, big = sweep.rows
        pooled = float(np.hypot(small.std_abs_delta, big.std_abs_delta))
        assert big.mean_abs_delta <= small.mean_abs_delta + pooled

    def test_size_exceeds_window(self):
        view = stationary_view()
        with pytest.raises(SizeExceedsWindow):
            dataset_size_sweep("linear", HPSpace(), view, [500],
                               np.arange(240), np.arange(240, 300),
                               SchemeParams(scheme="kfold", K=5), n_trials=1)

    def test_sizes_must_ascend(self):
        view = stationary_view()
        with pytest.raises(ValueError):
            dataset_size_sweep("linear", HPSpace(), view, [100, 50],
                               np.arange(240), np.arange(240, 300),
                               SchemeParams(scheme="kfold", K=5), n_trials=1)

    def test_csv_output(self, tmp_path):
        view = stationary_view()
        sweep = dataset_size_sweep("linear", HPSpace(), view, [60, 240],
                                   np.arange(240), np.arange(240, 300),
                                   SchemeParams(scheme="holdout"), n_trials=2)
        path = tmp_path / "sweep.csv"
        write_size_sweep_csv(sweep, path)
        lines = path.read_text(encoding="utf-8").strip().splitlines()
        assert lines[0] == "size_days,mean_abs_delta_mw,std_abs_delta_mw"
        assert len(lines) == 3
        assert lines[1].startswith("60,")
