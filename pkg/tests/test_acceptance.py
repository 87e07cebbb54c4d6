"""Shipping gate: one test per acceptance requirement.

Each test prints a single PASS line with the measured quantity and its pinned
tolerance; a failure surfaces the same numbers through the assert message.
Run with `pytest -v tests/test_acceptance.py` for the per-requirement verdict
lines. The real-data check at the bottom needs converted datasets and is
skipped unless GRIDCAST_REAL_DATA is set; see the README for the recipe.
"""
import os
import time
from datetime import date, datetime, timedelta

import numpy as np
import pytest

from gridcast.cli import (build_view, load_dataset, model_space, prepare,
                          run_benchmark, synth_generate, validate_synth)
from gridcast.crossval import (SchemeParams, make_splits,
                               run_delta_eps_experiment)
from gridcast.errors import TooFewSamples
from gridcast.evaluation import mae, metrics, nrmse, r2, rmse
from gridcast.features import fit_pca
from gridcast.gridstore import (FacilityRecord, FacilityRegistry, GridSpec,
                                TimeAxis, read_series_csv)
from gridcast.hpo import expected_improvement, gp_fit
from gridcast.ingest import assign_to_grid, compute_weights
from gridcast.models import (ModelSpec, cnn_init, cnn_loss_grads, fit,
                             gradient_check, mlp_init, mlp_loss_grads)


def _passline(text):
    print(f"PASS {text}")


def _synth(tmp, **over):
    cfg = {
        "sector": "Solar",
        "n_days": 1100,
        "grid": {"lat0": 47.0, "lon0": 5.0, "dlat": 0.5, "dlon": 0.5,
                 "nlat": 5, "nlon": 5},
        "variables": ["t2m", "ssrd"],
        "n_facilities": 16,
        "growth": [[0, 300.0], [1099, 1500.0]],
        "seasonal_amplitudes": [8.0, 3.0e6],
        "noise_sigma": 30.0,
        "link": "linear",
        "seed": 0,
    }
    cfg.update(over)
    synth_generate(validate_synth(cfg), tmp)
    return cfg


def _experiment_view(data_dir, cfg, train_end_row, val_end_row):
    bundle = load_dataset(data_dir)
    days = bundle.time.dates().astype(str)
    exp = {
        "sector": cfg["sector"], "data_dir": str(data_dir),
        "variables": cfg["variables"],
        "split": {"train_end": days[train_end_row],
                  "val_end": days[val_end_row],
                  "test_end": days[-1]},
        "views": ["Average"], "models": [{"family": "forest"}],
        "cv": {"scheme": "kfold"}, "hpo": {"algo": "random", "budget": 1},
    }
    prepared = prepare(exp, bundle)
    view, _ = build_view(prepared, "Average")
    return view, prepared


def _loop_metrics(y, yhat):
    n = len(y)
    sae = sse = sape = 0.0
    for a, b in zip(y, yhat):
        sae += abs(a - b)
        sse += (a - b) ** 2
        sape += abs((a - b) / a)
    mean = sum(y) / n
    sst = sum((a - mean) ** 2 for a in y)
    root = (sse / n) ** 0.5
    return {"mae": sae / n, "mape": 100.0 * sape / n, "rmse": root,
            "nrmse": 100.0 * root / (max(y) - min(y)),
            "r2": 1.0 - sse / sst}


def test_metric_suite_matches_loop_oracle():
    started = time.perf_counter()
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(8, 64))
        y = rng.uniform(1.0, 21.0, n)
        yhat = rng.uniform(-10.0, 30.0, n)
        got = metrics(y, yhat)
        want = _loop_metrics(y.tolist(), yhat.tolist())
        for key, ref in want.items():
            worst = max(worst, abs(getattr(got, key) - ref))
    y, yhat = np.array([0.0, 10.0]), np.array([5.0, 5.0])
    hand = (mae(y, yhat), rmse(y, yhat), nrmse(y, yhat), r2(y, yhat))
    elapsed = time.perf_counter() - started
    assert worst <= 1e-10, f"loop-oracle deviation {worst:.3e} > 1e-10"
    assert hand == (5.0, 5.0, 50.0, 0.0), f"hand case gave {hand}"
    assert elapsed < 1.0, f"took {elapsed:.2f} s, budget 1 s"
    _passline(f"metric suite: 1000-vector loop-oracle max dev {worst:.2e} "
              f"(tol 1e-10), hand case exact, {elapsed:.2f} s (< 1 s)")


def test_capacity_weights_normalize_and_single_facility_uniform():
    grid = GridSpec(45.0, 0.5, 5, 3.0, 0.5, 4)
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(100):
        nt = int(rng.integers(30, 400))
        axis = TimeAxis(datetime(2016, 1, 1), 86400, nt)
        records = [FacilityRecord(id="f0", sector="Wind", lat=46.0, lon=3.7,
                                  capacity_mw=float(rng.integers(1, 500)),
                                  start=date(2015, 1, 1))]
        for k in range(int(rng.integers(0, 14))):
            start = date(2015, 6, 1) + timedelta(
                days=int(rng.integers(0, 700)))
            stop = (start + timedelta(days=int(rng.integers(30, 900)))
                    if rng.random() < 0.3 else None)
            records.append(FacilityRecord(
                id=f"f{k + 1}", sector="Wind",
                lat=float(rng.uniform(44.9, 47.1)),
                lon=float(rng.uniform(2.9, 4.6)),
                capacity_mw=float(rng.uniform(0.5, 800.0)),
                start=start, stop=stop))
        registry = FacilityRegistry(sector="Wind", records=tuple(records))
        weights = compute_weights(assign_to_grid(registry, grid, axis))
        worst = max(worst, abs(weights.w.sum() - 1.0))
    assert worst <= 1e-9, f"weight total off by {worst:.3e} > 1e-9"

    axis = TimeAxis(datetime(2016, 1, 1), 86400, 365)
    solo = FacilityRegistry(sector="Wind", records=(
        FacilityRecord(id="only", sector="Wind", lat=46.0, lon=3.5,
                       capacity_mw=100.0, start=date(2015, 1, 1)),))
    w = compute_weights(assign_to_grid(solo, grid, axis)).w
    i, j = grid.cell_of(46.0, 3.5)
    assert (w[:, i, j] == 1.0 / 365).all(), "single facility != 1/T"
    assert w.sum() == 1.0
    _passline(f"capacity weights: 100 random registries sum to 1 "
              f"(max dev {worst:.2e}, tol 1e-9); single facility exactly 1/T")


def test_split_plans_hold_on_ten_thousand_draws():
    rng = np.random.default_rng(3)
    pool = ("holdout", "kfold", "expanding", "sliding", "blocking")
    checked = 0
    while checked < 10_000:
        n = int(rng.integers(30, 400))
        scheme = pool[int(rng.integers(len(pool)))]
        shuffle = bool(rng.integers(2)) and scheme in ("holdout", "kfold")
        params = SchemeParams(scheme=scheme, shuffle=shuffle,
                              K=int(rng.integers(2, 9)),
                              block_len=int(rng.integers(1, 11)),
                              test_fraction=float(rng.uniform(0.05, 0.4)),
                              rng_seed=int(rng.integers(1000)))
        try:
            plan = make_splits(n, params)
        except TooFewSamples:
            continue
        checked += 1
        for train, test in plan.iterations:
            assert len(train) and len(test)
            assert np.intersect1d(train, test).size == 0, params
            both = np.concatenate([train, test])
            assert both.min() >= 0 and both.max() < n, params
        if scheme == "kfold":
            tested = np.sort(np.concatenate([t for _, t in plan.iterations]))
            assert np.array_equal(tested, np.arange(n)), "kfold not a partition"
        if scheme in ("expanding", "sliding"):
            assert len(plan.iterations) == params.K - 1, params
            for train, test in plan.iterations:
                assert train.max() < test.min(), params
    _passline("split plans: 10000 random draws disjoint and in-range; kfold "
              "partitions; expanding/sliding chronological with K-1 folds")


def test_shuffled_kfold_overestimates_on_capacity_growth(tmp_path):
    started = time.perf_counter()
    space = model_space({"family": "forest", "space": [
        {"name": "n_trees", "kind": "int", "lo": 20, "hi": 45},
        {"name": "max_depth", "kind": "int", "lo": 5, "hi": 9}]})
    wins = 0
    gaps = []
    for seed in range(5):
        data = tmp_path / f"d{seed}"
        cfg = _synth(data, n_days=3000, seed=seed,
                     grid={"lat0": 47.0, "lon0": 5.0, "dlat": 0.5,
                           "dlon": 0.5, "nlat": 4, "nlon": 4},
                     growth=[[0, 300.0], [2999, 1800.0]])
        view, prepared = _experiment_view(data, cfg, 2399, 2899)
        ledgers = {}
        for scheme in (SchemeParams(scheme="kfold", shuffle=True, K=5,
                                    rng_seed=seed),
                       SchemeParams(scheme="expanding", K=5)):
            ledgers[scheme.scheme] = run_delta_eps_experiment(
                "forest", space, view, prepared.train_rows,
                prepared.val_rows, scheme, n_trials=3, seed=seed,
                model_seed=seed)
        gap = ledgers["kfold"].mean_delta() - ledgers["expanding"].mean_delta()
        gaps.append(gap)
        wins += gap > 0
    elapsed = time.perf_counter() - started
    assert wins >= 4, f"shuffled kfold larger mean delta in only {wins}/5 " \
                      f"seeds (gaps {np.round(gaps, 2).tolist()})"
    assert elapsed <= 600, f"took {elapsed:.0f} s, budget 600 s"
    _passline(f"error-estimate bias: shuffled kfold mean delta exceeds "
              f"expanding in {wins}/5 seeds (need >= 4), "
              f"gaps {np.round(gaps, 1).tolist()} MW, {elapsed:.0f} s")


def test_forest_cannot_extrapolate_and_detrending_wins(tmp_path):
    started = time.perf_counter()
    wins = 0
    pairs = []
    for seed in range(5):
        data = tmp_path / f"d{seed}"
        _synth(data, seed=seed)
        bundle = load_dataset(data)
        days = bundle.time.dates().astype(str)
        out = tmp_path / f"out{seed}"
        run_benchmark({
            "sector": "Solar", "data_dir": str(data),
            "variables": ["t2m", "ssrd"],
            "split": {"train_end": days[577], "val_end": days[734],
                      "test_end": days[1099]},
            "views": ["Average"],
            "models": [{"family": "forest",
                        "hyperparams": {"n_trees": 30, "max_depth": 8}}],
            "cv": {"scheme": "kfold", "K": 4},
            "hpo": {"algo": "random", "budget": 1},
            "detrend": [False, True], "seed": seed,
        }, out)

        y = read_series_csv(data / "target.csv", "power_mw").values
        fit_max = y[:735].max()
        raw = (out / "runs" / "average-forest" / "predictions.csv") \
            .read_text().strip().splitlines()[1:]
        preds = np.array([float(r.split(",")[2]) for r in raw])
        assert preds.max() <= fit_max * (1 + 1e-9), \
            f"seed {seed}: constant-leaf forest predicted {preds.max():.2f}" \
            f" above its training ceiling {fit_max:.2f}"

        rows = [r.split(",") for r in (out / "metrics.csv")
                .read_text().strip().splitlines()[1:]]
        score = {r[2]: float(r[11]) for r in rows}
        pairs.append((score["false"], score["true"]))
        wins += score["true"] < score["false"]
    elapsed = time.perf_counter() - started
    assert wins >= 4, f"detrending won only {wins}/5 paired seeds: {pairs}"
    assert elapsed <= 600, f"took {elapsed:.0f} s, budget 600 s"
    _passline(f"tree extrapolation: test predictions never exceed the train "
              f"ceiling (5/5 seeds); detrending cut test nRMSE in {wins}/5 "
              f"paired seeds (need >= 4), {elapsed:.0f} s")


def test_neural_gradients_match_finite_differences():
    started = time.perf_counter()
    worst_mlp = worst_cnn = 0.0
    for seed in range(5):
        rng = np.random.default_rng(seed)
        d, h = int(rng.integers(2, 6)), int(rng.integers(3, 8))
        X = rng.normal(size=(8, d))
        y = rng.normal(size=8)
        params = mlp_init([d, h, 1], rng)
        worst_mlp = max(worst_mlp, gradient_check(
            lambda p: mlp_loss_grads(p, X, y, "tanh"), params,
            n_samples=5, rng=rng))

        X_img = rng.normal(size=(4, 2, 6, 7))
        X_scalar = rng.normal(size=(4, 2))
        yc = rng.normal(size=4)
        cparams = cnn_init(2, 2, conv_channels=(3, 4), dense_size=5, rng=rng)
        worst_cnn = max(worst_cnn, gradient_check(
            lambda p: cnn_loss_grads(p, X_img, X_scalar, yc, "tanh"),
            cparams, n_samples=5, rng=rng))
    elapsed = time.perf_counter() - started
    assert worst_mlp <= 1e-4, f"MLP gradient error {worst_mlp:.2e} > 1e-4"
    assert worst_cnn <= 1e-4, f"CNN gradient error {worst_cnn:.2e} > 1e-4"
    assert elapsed < 60, f"took {elapsed:.1f} s, budget 60 s"
    _passline(f"neural gradients: 5 random instances each, max relative "
              f"error MLP {worst_mlp:.2e} / CNN {worst_cnn:.2e} (tol 1e-4), "
              f"{elapsed:.1f} s (< 60 s)")


def test_pca_orthonormal_and_exact_reconstruction():
    rng = np.random.default_rng(7)
    X = rng.normal(size=(80, 12)) @ rng.normal(size=(12, 12))
    model = fit_pca(X, 12)
    C = model.components
    ortho = np.abs(C @ C.T - np.eye(12)).max()
    Xhat = model.inverse_transform(model.transform(X))
    recon = np.linalg.norm(X - Xhat) / np.linalg.norm(X)
    assert ortho <= 1e-9, f"orthonormality defect {ortho:.2e} > 1e-9"
    assert recon <= 1e-8, f"full-rank reconstruction {recon:.2e} > 1e-8"
    _passline(f"pca: orthonormality defect {ortho:.2e} (tol 1e-9), "
              f"full-rank reconstruction {recon:.2e} (tol 1e-8)")


def test_expected_improvement_and_gp_interpolation():
    sigma, best = 0.7, 2.0
    ei = float(expected_improvement(np.array([best - sigma]),
                                    np.array([sigma ** 2]), best)[0])
    from scipy.special import ndtr
    ref = sigma * (ndtr(1.0) + np.exp(-0.5) / np.sqrt(2 * np.pi))
    dev = abs(ei - ref)
    assert dev <= 1e-9, f"closed-form deviation {dev:.2e} > 1e-9"

    rng = np.random.default_rng(5)
    X = np.sort(rng.random(7))[:, None]
    y = np.sin(3 * X[:, 0]) + 0.2 * X[:, 0]
    surrogate = gp_fit(X, y, noise_grid=(1e-8,))
    mean, _ = surrogate.predict(X)
    interp = np.abs(mean - y).max()
    assert interp <= 1e-4, f"interpolation error {interp:.2e} > 1e-4"

    neg = 0.0
    for k in range(100):
        frng = np.random.default_rng(100 + k)
        n, d = int(frng.integers(2, 12)), int(frng.integers(1, 4))
        Xf = frng.random((n, d))
        yf = frng.normal(size=n) * frng.uniform(0.01, 50.0)
        surf = gp_fit(Xf, yf)
        cands = np.vstack([frng.random((50, d)), Xf])
        m, v = surf.predict(cands)
        eif = expected_improvement(m, v, float(yf.min()))
        assert np.isfinite(eif).all(), f"non-finite EI on surrogate {k}"
        neg = min(neg, float(eif.min()))
    assert neg >= 0.0, f"negative EI {neg:.2e}"
    _passline(f"acquisition: closed-form dev {dev:.2e} (tol 1e-9); "
              f"noise-free interpolation {interp:.2e} (tol 1e-4); EI >= 0 on "
              f"100 fuzzed surrogates")


def test_kfold_wall_time_scales_with_fold_count(tmp_path):
    cfg = _synth(tmp_path, n_days=400, noise_sigma=10.0,
                 growth=[[0, 500.0], [399, 900.0]])
    view, prepared = _experiment_view(tmp_path, cfg, 272, 333)
    space = model_space({"family": "forest", "space": [
        {"name": "n_trees", "kind": "int", "lo": 25, "hi": 40},
        {"name": "max_depth", "kind": "int", "lo": 6, "hi": 9}]})
    fit(ModelSpec(family="forest", hyperparams={"n_trees": 30}), view,
        prepared.train_rows)  # warm caches before timing
    per_trial = {}
    for scheme in (SchemeParams(scheme="kfold", K=10),
                   SchemeParams(scheme="holdout", test_fraction=0.1)):
        ledger = run_delta_eps_experiment(
            "forest", space, view, prepared.train_rows, prepared.val_rows,
            scheme, n_trials=3, seed=0)
        per_trial[scheme.scheme] = float(
            np.mean([r.seconds for r in ledger.rows]))
    ratio = per_trial["kfold"] / per_trial["holdout"]
    assert ratio >= 5.0, \
        f"kfold {per_trial['kfold']:.3f} s/trial vs holdout " \
        f"{per_trial['holdout']:.3f} gives ratio {ratio:.1f} < K/2 = 5"
    _passline(f"cv cost ordering: kfold (K=10) {per_trial['kfold']:.3f} "
              f"s/trial >= 5x holdout {per_trial['holdout']:.3f} s/trial "
              f"(ratio {ratio:.1f})")


def test_benchmark_rerun_byte_identical_csvs(tmp_path):
    data = tmp_path / "data"
    _synth(data, n_days=400, noise_sigma=5.0,
           growth=[[0, 500.0], [399, 900.0]])
    days = load_dataset(data).time.dates().astype(str)
    cfg = {
        "sector": "Solar", "data_dir": str(data),
        "variables": ["t2m", "ssrd"],
        "split": {"train_end": days[272], "val_end": days[333],
                  "test_end": days[399]},
        "views": ["Average"],
        "models": [{"family": "forest", "space": [
            {"name": "n_trees", "kind": "int", "lo": 5, "hi": 12},
            {"name": "max_depth", "kind": "int", "lo": 2, "hi": 5}]}],
        "cv": {"scheme": "kfold", "K": 4},
        "hpo": {"algo": "random", "budget": 3},
        "detrend": [False], "seed": 21,
    }
    run_benchmark(cfg, tmp_path / "a")
    run_benchmark(cfg, tmp_path / "b")
    rel_a = sorted(p.relative_to(tmp_path / "a")
                   for p in (tmp_path / "a").rglob("*.csv"))
    rel_b = sorted(p.relative_to(tmp_path / "b")
                   for p in (tmp_path / "b").rglob("*.csv"))
    assert rel_a == rel_b
    compared = 0
    for rel in rel_a:
        if rel.name == "timing.csv":   # wall-clock by design, see README
            continue
        assert (tmp_path / "a" / rel).read_bytes() == \
            (tmp_path / "b" / rel).read_bytes(), f"{rel} differs"
        compared += 1
    assert compared >= 2
    _passline(f"determinism: two benchmark runs of one config produced "
              f"{compared} byte-identical report CSVs "
              f"(timing.csv excluded as wall-clock)")


@pytest.mark.skipif(not os.environ.get("GRIDCAST_REAL_DATA"),
                    reason="set GRIDCAST_REAL_DATA to a directory of "
                           "converted-dataset benchmark configs")
def test_real_data_nrmse_bands(tmp_path):
    import json
    from pathlib import Path
    root = Path(os.environ["GRIDCAST_REAL_DATA"])
    reference = {"solar": 6.14, "wind": 3.77}
    results = {}
    for sector, ref in reference.items():
        cfg = json.loads((root / f"{sector}.json").read_text())
        run_benchmark(cfg, tmp_path / sector)
        rows = [r.split(",") for r in
                (tmp_path / sector / "metrics.csv").read_text()
                .strip().splitlines()[1:]]
        best = min(float(r[11]) for r in rows if r[11])
        results[sector] = best
        assert 4.0 - 2.0 <= best <= 10.0 + 2.0, \
            f"{sector} best test nRMSE {best:.2f} outside the expected band"
        assert abs(best - ref) <= 2.0, \
            f"{sector} best test nRMSE {best:.2f} not within 2 points of {ref}"
    _passline(f"real data: best tuned test nRMSE solar "
              f"{results['solar']:.2f} / wind {results['wind']:.2f}, within "
              f"2 points of the 6.14 / 3.77 reference and the 4-10 band")
