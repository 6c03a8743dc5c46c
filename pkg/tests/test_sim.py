import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contentsim import sim
from contentsim.errors import ConfigError
from oracles import qualifying_sets, subset_inclusion_probabilities


def rng(seed=0):
    return np.random.default_rng(seed)


def test_small_population_shapes():
    cfg = sim.SimConfig(n_posts=3, n_users=2, beta=1, iterations=1, seed=42)
    posts, users = sim.generate_population(cfg, sim.make_generator(cfg.seed))
    assert len(posts) == 3 and len(users) == 2
    assert np.all((posts.attractiveness >= 0) & (posts.attractiveness < 1))
    assert sorted(users.preference.tolist()) == [0.0, 1.0]
    assert all(isinstance(p, sim.Post) for p in posts)
    assert all(u.activity >= 1 for u in users)


def test_population_is_deterministic():
    cfg = sim.SimConfig(n_posts=50, n_users=80, beta=3)
    a = sim.generate_population(cfg, sim.make_generator(7, 1, 2))
    b = sim.generate_population(cfg, sim.make_generator(7, 1, 2))
    for x, y in zip(a, b):
        for name in x.__dataclass_fields__:
            assert np.array_equal(getattr(x, name), getattr(y, name))


def test_activity_and_preference_ranges():
    cfg = sim.SimConfig(n_posts=200, n_users=5000)
    _, users = sim.generate_population(cfg, rng(1))
    assert users.activity.min() >= 1 and users.activity.max() <= 200
    assert users.activity.dtype == np.int64
    assert users.preference.min() == 0 and users.preference.max() == 1
    assert np.all(users.preference_raw >= 1) and np.all(users.preference_raw <= 1e4)


def test_extreme_beta_keeps_attractiveness_tiny():
    # P(max >= 0.01) <= P * 0.99**beta, which underflows to 0 at beta = 1e6
    assert 1e4 * 0.99**1e6 == 0.0
    cfg = sim.SimConfig(n_posts=10_000, n_users=2, beta=1e6)
    for seed in range(5):
        posts, _ = sim.generate_population(cfg, rng(seed))
        assert posts.attractiveness.max() < 0.01


@pytest.mark.parametrize(
    "kwargs",
    [dict(n_posts=0), dict(n_users=0), dict(n_users=1), dict(beta=0.5), dict(iterations=0),
     dict(gamma=1.0), dict(activity_max=0.5), dict(pref_max=1.0), dict(seed=-1)],
)
def test_invalid_configs(kwargs):
    with pytest.raises(ConfigError):
        sim.SimConfig(**kwargs)


def test_user_with_zero_preference_likes_all_qualifying():
    posts = sim.PostSet(np.array([0.5, 0.6, 0.7]))
    users = sim.UserSet.from_arrays([3], [0.0])
    res = sim.run_iteration(posts, users, rng())
    assert res.likes_per_user.tolist() == [3]
    assert res.likes_per_post.tolist() == [1, 1, 1]


def test_user_with_unit_preference_likes_nothing():
    posts = sim.PostSet(np.array([0.1, 0.99, 0.5, 0.999999]))
    users = sim.UserSet.from_arrays([10], [1.0])
    res = sim.run_iteration(posts, users, rng())
    assert res.likes_per_user.tolist() == [0]
    assert res.likes_per_post.sum() == 0


def test_strict_inequality_at_tie():
    posts = sim.PostSet(np.array([0.3, 0.3, 0.8]))
    users = sim.UserSet.from_arrays([5], [0.3])
    res = sim.run_iteration(posts, users, rng(), keep_assignments=True)
    assert res.assignments[0].tolist() == [2]


def test_capped_subset_frequency_two_of_three():
    expected = subset_inclusion_probabilities(3, 2)
    assert expected == pytest.approx([2 / 3] * 3)
    posts = sim.PostSet(np.array([0.5, 0.6, 0.7]))
    users = sim.UserSet.from_arrays([2], [0.0])
    g = rng(3)
    hits = np.zeros(3)
    reps = 10_000
    for _ in range(reps):
        res = sim.run_iteration(posts, users, g)
        assert res.likes_per_user[0] == 2
        hits += res.likes_per_post
    assert np.all(np.abs(hits / reps - expected) < 0.02)


populations = st.integers(1, 5).flatmap(
    lambda p: st.tuples(
        st.lists(st.floats(0, 1, exclude_max=True), min_size=p, max_size=p),
        st.lists(st.tuples(st.integers(1, 6), st.floats(0, 1)), min_size=1, max_size=5),
        st.integers(0, 2**32 - 1),
    )
)


@settings(max_examples=300)
@given(populations)
def test_matches_brute_force_like_rule(pop):
    v, user_rows, seed = pop
    activity = [a for a, _ in user_rows]
    prefs = [b for _, b in user_rows]
    res = sim.run_iteration(sim.PostSet(np.array(v)), sim.UserSet.from_arrays(activity, prefs), rng(seed),
                            keep_assignments=True)
    expected_post = np.zeros(len(v), dtype=int)
    for i, (q, a) in enumerate(zip(qualifying_sets(v, prefs), activity)):
        liked = set(res.assignments[i].tolist())
        if len(q) <= a:
            assert liked == q
        else:
            assert liked <= q and len(liked) == a
        expected_post[list(liked)] += 1
        assert res.likes_per_user[i] == min(a, len(q))
    assert res.likes_per_post.tolist() == expected_post.tolist()


def test_assignments_agree_with_counts():
    cfg = sim.SimConfig(n_posts=300, n_users=400, beta=5)
    posts, users = sim.generate_population(cfg, rng(8))
    res = sim.run_iteration(posts, users, rng(9), keep_assignments=True)
    counts = np.bincount(np.concatenate(res.assignments), minlength=300)
    assert counts.tolist() == res.likes_per_post.tolist()
    assert [len(a) for a in res.assignments] == res.likes_per_user.tolist()


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([1.0, 7.0, 1e3, 1e6]))
def test_conservation_cap_and_monotonicity(seed, beta):
    cfg = sim.SimConfig(n_posts=60, n_users=120, beta=beta)
    g = rng(seed)
    posts, users = sim.generate_population(cfg, g)
    res = sim.run_iteration(posts, users, g)
    q = sim.qualifying_counts(posts, users)
    assert res.likes_per_user.sum() == res.likes_per_post.sum()
    assert np.all(res.likes_per_user <= users.activity)
    assert np.array_equal(res.likes_per_user, np.minimum(users.activity, q))
    assert sim.count_violations(users, q, res) == 0
    order = np.argsort(users.preference)
    # lower preference never qualifies for fewer posts
    assert np.all(np.diff(q[order]) <= 0)


def test_experiment_deterministic():
    cfg = sim.SimConfig(n_posts=10, n_users=10, beta=1, iterations=2, seed=123)
    a, b = sim.run_experiment(cfg), sim.run_experiment(cfg)
    assert np.array_equal(a.likes_per_user, b.likes_per_user)
    assert np.array_equal(a.likes_per_post, b.likes_per_post)
    assert a.iterations == b.iterations


def test_experiment_pools_iterations():
    cfg = sim.SimConfig(n_posts=100, n_users=200, beta=1, iterations=10, seed=5)
    res = sim.run_experiment(cfg)
    assert res.likes_per_post.size == 1000 and res.likes_per_user.size == 2000
    assert res.total_likes > 0
    assert len(res.iterations) == 10
    assert sum(s.total_likes for s in res.iterations) == res.total_likes
    assert res.invariant_violations == 0
    avg = res.averaged_moments("post")
    assert avg["mean"] == pytest.approx(np.mean([s.post[0] for s in res.iterations]))


def test_iterations_are_fresh_populations():
    cfg = sim.SimConfig(n_posts=50, n_users=50, iterations=2, seed=1)
    res = sim.run_experiment(cfg)
    assert not np.array_equal(res.likes_per_post[:50], res.likes_per_post[50:])


def test_volume_drops_with_heterogeneity():
    # oracle: 10 independent seeds, each pairing beta=1 against beta=1e6 on the same schedule
    for seed in range(10):
        lo = sim.run_experiment(sim.SimConfig(n_posts=100, n_users=200, beta=1, iterations=10, seed=seed))
        hi = sim.run_experiment(sim.SimConfig(n_posts=100, n_users=200, beta=1e6, iterations=10, seed=seed))
        assert hi.total_likes < lo.total_likes


def test_singleton_sweep_equals_experiment():
    cfg = sim.SimConfig(n_posts=40, n_users=60, beta=1, iterations=3, seed=9)
    sweep = sim.run_sweep(cfg, [1])
    single = sim.run_experiment(cfg)
    assert list(sweep) == [1.0]
    assert np.array_equal(sweep[1.0].likes_per_post, single.likes_per_post)
    assert np.array_equal(sweep[1.0].likes_per_user, single.likes_per_user)


def test_sweep_keys_and_independent_streams():
    cfg = sim.SimConfig(n_posts=40, n_users=60, iterations=2, seed=9)
    res = sim.run_sweep(cfg, [1, 20, 1e6])
    assert sorted(res) == [1.0, 20.0, 1e6]
    assert res[20.0].config.beta == 20.0


def test_parallel_equals_serial():
    cfg = sim.SimConfig(n_posts=80, n_users=150, iterations=4, seed=77)
    serial = sim.run_sweep(cfg, [1, 1e3], workers=1)
    parallel = sim.run_sweep(cfg, [1, 1e3], workers=3)
    for beta in serial:
        assert np.array_equal(serial[beta].likes_per_post, parallel[beta].likes_per_post)
        assert np.array_equal(serial[beta].likes_per_user, parallel[beta].likes_per_user)
        assert serial[beta].iterations == parallel[beta].iterations


def test_sweep_rejects_empty_and_duplicates():
    cfg = sim.SimConfig(n_posts=5, n_users=5, iterations=1)
    with pytest.raises(ValueError):
        sim.run_sweep(cfg, [])
    with pytest.raises(ValueError):
        sim.run_sweep(cfg, [1, 1.0])
    with pytest.raises(ConfigError):
        sim.run_sweep(cfg, [0.5])


def test_decade_sweep_desk_scale_runtime():
    import time

    cfg = sim.SimConfig(n_posts=1000, n_users=2000, iterations=10)
    t = time.perf_counter()
    res = sim.run_sweep(cfg, sim.DECADE_BETA_SWEEP)
    assert time.perf_counter() - t < 60
    assert len(res) == 7
    assert all(r.invariant_violations == 0 for r in res.values())
