"""Search spaces, the GP surrogate, expected improvement, and both searchers."""
import numpy as np
import pytest

from gridcast.errors import ConfigError
from gridcast.hpo import (BayesSearcher, Dim, HPSpace, RandomSearcher,
                          bayesian_search, default_space, expected_improvement,
                          gp_fit, make_searcher, propose_ei, random_search)
from gridcast.models import HYPERPARAM_DEFAULTS, MODEL_FAMILIES, ModelSpec

PHI1_PLUS_PDF1 = 1.0833154705876863   # EI multiple of sigma when mean = best - sigma


def mixed_space():
    return HPSpace((Dim("n", "int", 2, 12),
                    Dim("frac", "float", 0.1, 0.9),
                    Dim("lr", "log_float", 1e-4, 1.0),
                    Dim("arch", "categorical", choices=((16,), (32,), (32, 16)))))


class TestSpace:
    def test_dim_validation(self):
        with pytest.raises(ConfigError):
            Dim("x", "gaussian")
        with pytest.raises(ConfigError):
            Dim("x", "categorical")
        with pytest.raises(ConfigError):
            Dim("x", "float", 1.0, 1.0)
        with pytest.raises(ConfigError):
            Dim("x", "log_float", 0.0, 1.0)
        with pytest.raises(ConfigError):
            Dim("x", "float", 0.0, float("inf"))

    def test_duplicate_names_rejected(self):
        with pytest.raises(ConfigError):
            HPSpace((Dim("a", "float"), Dim("a", "int", 0, 3)))

    def test_sample_respects_bounds(self):
        space = mixed_space()
        rng = np.random.default_rng(0)
        for _ in range(300):
            p = space.sample(rng)
            assert 2 <= p["n"] <= 12 and isinstance(p["n"], int)
            assert 0.1 <= p["frac"] <= 0.9
            assert 1e-4 <= p["lr"] <= 1.0
            assert p["arch"] in ((16,), (32,), (32, 16))

    def test_log_uniform_spread(self):
        space = HPSpace((Dim("lr", "log_float", 1e-4, 1.0),))
        rng = np.random.default_rng(1)
        draws = np.array([space.sample(rng)["lr"] for _ in range(4000)])
        # log-uniform: each decade gets ~a quarter of the draws
        frac_low = np.mean(draws < 1e-3)
        assert 0.2 < frac_low < 0.3

    def test_encoded_dim(self):
        assert mixed_space().encoded_dim == 3 + 3   # three scalars + one-hot(3)
        assert HPSpace().encoded_dim == 0

    def test_encode_decode_round_trip(self):
        space = mixed_space()
        rng = np.random.default_rng(2)
        for _ in range(100):
            p = space.sample(rng)
            q = space.decode(space.encode(p))
            assert q["n"] == p["n"]
            assert q["arch"] == p["arch"]
            assert q["frac"] == pytest.approx(p["frac"], rel=1e-12)
            assert q["lr"] == pytest.approx(p["lr"], rel=1e-12)

    def test_decode_clamps_and_snaps(self):
        space = mixed_space()
        lo = space.decode(np.array([-2.0, -2.0, -2.0, 0.2, 0.9, 0.1]))
        hi = space.decode(np.array([3.0, 3.0, 3.0, 0.0, 0.0, 1.0]))
        assert lo["n"] == 2 and hi["n"] == 12
        assert lo["frac"] == 0.1 and hi["frac"] == 0.9
        assert lo["lr"] == pytest.approx(1e-4) and hi["lr"] == pytest.approx(1.0)
        assert lo["arch"] == (32,) and hi["arch"] == (32, 16)

    def test_default_spaces_match_model_families(self):
        rng = np.random.default_rng(3)
        for family in MODEL_FAMILIES:
            space = default_space(family)
            tunable = {d.name for d in space.dims}
            assert tunable <= set(HYPERPARAM_DEFAULTS[family])
            point = space.sample(rng)
            spec = ModelSpec(family=family, hyperparams=point)   # validates keys
            assert spec.family == family
        assert default_space("linear").encoded_dim == 0
        with pytest.raises(ConfigError):
            default_space("kriging")


class TestGP:
    def test_needs_two_points(self):
        with pytest.raises(ValueError):
            gp_fit(np.array([[0.5]]), np.array([1.0]))
        with pytest.raises(ValueError):
            gp_fit(np.array([[0.5], [0.6]]), np.array([1.0]))

    def test_duplicate_points_equal_scores(self):
        sur = gp_fit(np.array([[0.5], [0.5]]), np.array([2.0, 2.0]))
        mean, var = sur.predict(np.array([[0.5], [0.1], [0.9]]))
        assert np.abs(mean - 2.0).max() <= 1e-6
        assert (var >= 0).all()

    def test_interpolates_noise_free(self):
        rng = np.random.default_rng(4)
        X = rng.random((20, 2))
        y = np.sin(3 * X[:, 0]) + X[:, 1] ** 2
        sur = gp_fit(X, y, noise_grid=(1e-8,))
        mean, _ = sur.predict(X)
        assert np.abs(mean - y).max() <= 1e-4 * max(y.std(), 1.0)

    def test_posterior_variance_at_observed_below_noise(self):
        rng = np.random.default_rng(5)
        X = rng.random((12, 2))
        y = rng.normal(size=12)
        sur = gp_fit(X, y)
        _, var = sur.predict(X)
        assert (var / sur.y_std ** 2 <= sur.noise + 1e-6).all()

    def test_sine_recovery(self):
        X = np.linspace(0.0, 1.0, 8)[:, None]
        y = np.sin(2 * np.pi * X[:, 0])
        sur = gp_fit(X, y)
        grid = np.linspace(0.0, 1.0, 101)[:, None]
        mean, _ = sur.predict(grid)
        err = np.sqrt(np.mean((mean - np.sin(2 * np.pi * grid[:, 0])) ** 2))
        assert err <= 0.1

    def test_variance_grows_away_from_data(self):
        sur = gp_fit(np.array([[0.2], [0.4]]), np.array([1.0, 2.0]),
                     noise_grid=(1e-8,))
        _, var = sur.predict(np.array([[0.2], [0.9]]))
        assert var[1] > var[0]


class _FlatSurrogate:
    """Stub with zero posterior variance everywhere."""
    X = np.zeros((1, 2))

    def predict(self, Xq):
        Xq = np.atleast_2d(Xq)
        return np.full(len(Xq), 1.0), np.zeros(len(Xq))


class TestEI:
    def test_zero_variance_at_best_is_zero(self):
        ei = expected_improvement(np.array([5.0]), np.array([0.0]), best=5.0)
        assert ei[0] == 0.0

    def test_zero_variance_improvement_is_gap(self):
        ei = expected_improvement(np.array([3.0, 7.0]), np.zeros(2), best=5.0)
        assert ei.tolist() == [2.0, 0.0]

    def test_one_sigma_below_best_closed_form(self):
        for sigma in (0.5, 1.0, 3.0):
            ei = expected_improvement(np.array([10.0 - sigma]),
                                      np.array([sigma ** 2]), best=10.0)
            assert ei[0] == pytest.approx(sigma * PHI1_PLUS_PDF1, abs=1e-9)

    def test_never_negative(self):
        rng = np.random.default_rng(6)
        mean = rng.normal(0, 5, size=2000)
        var = rng.uniform(0, 4, size=2000)
        var[::7] = 0.0
        ei = expected_improvement(mean, var, best=float(rng.normal()))
        assert (ei >= 0).all()

    def test_proposal_inside_unit_cube(self):
        rng = np.random.default_rng(7)
        sur = gp_fit(rng.random((6, 3)), rng.normal(size=6))
        prop = propose_ei(sur, best_so_far=0.0, seed=11)
        assert prop.u.shape == (3,)
        assert (prop.u >= 0).all() and (prop.u <= 1).all()
        assert prop.ei >= 0 and not prop.fallback

    def test_all_zero_variance_falls_back(self):
        prop = propose_ei(_FlatSurrogate(), best_so_far=0.5)
        assert prop.fallback
        assert (prop.u >= 0).all() and (prop.u <= 1).all()


class TestRandomSearch:
    def test_budget_one(self):
        space = HPSpace((Dim("x", "float"),))
        res = random_search(space, lambda p: p["x"] ** 2, budget=1)
        assert len(res.trials) == 1
        assert res.best.score == res.trials[0].score

    def test_distance_objective_coverage(self):
        space = HPSpace((Dim("x", "float"),))
        res = random_search(space, lambda p: abs(p["x"] - 0.37), budget=1000,
                            seed=0)
        assert res.best.score <= 0.01

    def test_same_seed_identical_sequence(self):
        space = mixed_space()
        r1 = random_search(space, lambda p: p["frac"], budget=20, seed=5)
        r2 = random_search(space, lambda p: p["frac"], budget=20, seed=5)
        assert [t.point for t in r1.trials] == [t.point for t in r2.trials]

    def test_sequence_ignores_tell(self):
        space = mixed_space()
        a = RandomSearcher(space, seed=3)
        b = RandomSearcher(space, seed=3)
        pts_a, pts_b = [], []
        for k in range(10):
            pa, pb = a.ask(), b.ask()
            a.tell(pa, float(k))       # scores must not steer the stream
            pts_a.append(pa)
            pts_b.append(pb)
        assert pts_a == pts_b

    def test_failures_recorded_and_budget_consumed(self):
        space = HPSpace((Dim("x", "float"),))

        def objective(p):
            if p["x"] < 0.5:
                raise RuntimeError("diverged")
            return p["x"]

        res = random_search(space, objective, budget=40, seed=1)
        assert len(res.trials) == 40
        failed = [t for t in res.trials if t.score is None]
        assert failed and all("diverged" in t.error for t in failed)
        assert res.best.score >= 0.5

    def test_all_failures_raise_on_best(self):
        space = HPSpace((Dim("x", "float"),))

        def objective(p):
            raise RuntimeError("nope")

        res = random_search(space, objective, budget=3)
        with pytest.raises(ValueError):
            res.best

    def test_bad_budget(self):
        with pytest.raises(ValueError):
            random_search(HPSpace((Dim("x", "float"),)), lambda p: 0.0, budget=0)


class TestBayesSearch:
    def test_empty_space(self):
        res = bayesian_search(HPSpace(), lambda p: 1.0, budget=4)
        assert [t.point for t in res.trials] == [{}] * 4

    def test_points_stay_inside_bounds(self):
        space = mixed_space()

        def objective(p):
            return (p["n"] - 7) ** 2 + p["frac"] + np.log10(p["lr"]) ** 2

        res = bayesian_search(space, objective, budget=25, seed=2, n_init=4)
        assert len(res.trials) == 25
        for t in res.trials:
            assert 2 <= t.point["n"] <= 12
            assert 0.1 <= t.point["frac"] <= 0.9
            assert 1e-4 <= t.point["lr"] <= 1.0
            assert t.point["arch"] in ((16,), (32,), (32, 16))

    def test_failed_trials_do_not_poison_surrogate(self):
        space = HPSpace((Dim("x", "float"),))

        def objective(p):
            if p["x"] > 0.8:
                raise RuntimeError("boom")
            return (p["x"] - 0.3) ** 2

        res = bayesian_search(space, objective, budget=20, seed=3)
        assert res.best.score <= 0.05

    def test_beats_random_on_bowl(self):
        space = HPSpace((Dim("x", "float"), Dim("y", "float")))

        def bowl(p):
            return (p["x"] - 0.3) ** 2 + (p["y"] - 0.7) ** 2

        def steps_to(res, threshold=0.05):
            for t in res.trials:
                if t.score is not None and t.score <= threshold:
                    return t.trial_id
            return len(res.trials) + 1

        rand_steps, bayes_steps = [], []
        for seed in range(11):
            rand_steps.append(steps_to(random_search(space, bowl, 50, seed=seed)))
            bayes_steps.append(steps_to(bayesian_search(space, bowl, 50,
                                                        seed=seed)))
        assert np.median(bayes_steps) <= np.median(rand_steps)

    def test_make_searcher(self):
        space = HPSpace((Dim("x", "float"),))
        assert isinstance(make_searcher("random", space), RandomSearcher)
        assert isinstance(make_searcher("bayes", space), BayesSearcher)
        with pytest.raises(ValueError):
            make_searcher("grid", space)

    def test_liar_width_validation(self):
        with pytest.raises(ValueError):
            BayesSearcher(HPSpace((Dim("x", "float"),)), liar_width=0)
