"""Agent-based model of post consumption under varying content heterogeneity.

Posts carry an attractiveness ``v ~ Be(1, beta)``. Users carry an activity
budget ``a`` and a fixed preference ``b``, both drawn from a truncated power
law; ``b`` is min-max normalized over the user population. A user likes a
post iff ``b < v``, and never more than ``a`` posts: when more posts qualify,
a uniformly random ``a``-subset of them is liked. There is no user network.

Every iteration draws a fresh population from its own generator, derived from
``(seed, stream_index, iteration)``, so serial and parallel runs agree.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Iterator, Sequence

import numpy as np

from . import stats
from .distributions import (
    BetaParams,
    TruncatedPowerLawParams,
    sample_beta,
    sample_truncated_power_law,
    unity_normalize,
)
from .errors import ConfigError, ContentSimError

DECADE_BETA_SWEEP = (1.0, 10.0, 1e2, 1e3, 1e4, 1e5, 1e6)


@dataclass(frozen=True)
class Post:
    id: int
    attractiveness: float


@dataclass(frozen=True)
class UserAgent:
    id: int
    activity: int
    preference_raw: float
    preference: float


@dataclass(frozen=True)
class PostSet:
    """Column store of posts; indexing yields :class:`Post`."""

    attractiveness: np.ndarray

    def __len__(self):
        return self.attractiveness.size

    def __getitem__(self, i) -> Post:
        return Post(int(i), float(self.attractiveness[i]))

    def __iter__(self) -> Iterator[Post]:
        return (self[i] for i in range(len(self)))


@dataclass(frozen=True)
class UserSet:
    """Column store of users; indexing yields :class:`UserAgent`."""

    activity: np.ndarray
    preference_raw: np.ndarray
    preference: np.ndarray

    def __len__(self):
        return self.activity.size

    def __getitem__(self, i) -> UserAgent:
        return UserAgent(
            int(i), int(self.activity[i]), float(self.preference_raw[i]), float(self.preference[i])
        )

    def __iter__(self) -> Iterator[UserAgent]:
        return (self[i] for i in range(len(self)))

    @classmethod
    def from_arrays(cls, activity, preference):
        """Users with given budgets and already-normalized preferences."""
        pref = np.asarray(preference, dtype=float)
        return cls(np.asarray(activity, dtype=np.int64), pref.copy(), pref)


@dataclass(frozen=True)
class SimConfig:
    n_posts: int = 10_000
    n_users: int = 20_000
    beta: float = 1.0
    gamma: float = 1.5
    iterations: int = 100
    seed: int = 0
    activity_min: float = 1.0
    activity_max: float | None = None  # None -> n_posts
    pref_min: float = 1.0
    pref_max: float = 1e4

    def __post_init__(self):
        for name in ("n_posts", "n_users", "iterations"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value}")
        if self.n_users < 2:
            raise ConfigError("n_users must be >= 2: preference normalization needs two users")
        if not self.beta >= 1 or not np.isfinite(self.beta):
            raise ConfigError(f"beta must be a finite value >= 1, got {self.beta}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        try:
            self.activity_params()
            self.preference_params()
        except ContentSimError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def effective_activity_max(self) -> float:
        return float(self.n_posts if self.activity_max is None else self.activity_max)

    def activity_params(self) -> TruncatedPowerLawParams:
        return TruncatedPowerLawParams(self.gamma, self.activity_min, self.effective_activity_max)

    def preference_params(self) -> TruncatedPowerLawParams:
        return TruncatedPowerLawParams(self.gamma, self.pref_min, self.pref_max)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class IterationResult:
    likes_per_user: np.ndarray
    likes_per_post: np.ndarray
    # per-user array of liked post indices; only filled when requested
    assignments: list | None = None


@dataclass(frozen=True)
class IterationSummary:
    total_likes: int
    user: tuple  # (mean, variance, skewness, excess_kurtosis), NaN where undefined
    post: tuple


@dataclass
class ExperimentResult:
    config: SimConfig
    likes_per_user: np.ndarray  # pooled over iterations
    likes_per_post: np.ndarray
    iterations: list[IterationSummary] = field(default_factory=list)
    invariant_violations: int = 0

    @property
    def total_likes(self) -> int:
        return int(self.likes_per_post.sum())

    def averaged_moments(self, observable: str) -> dict:
        """Across-iteration mean of the per-iteration moment summaries."""
        rows = np.array([getattr(s, observable) for s in self.iterations], dtype=float)
        means = [float(col[~np.isnan(col)].mean()) if (~np.isnan(col)).any() else float("nan") for col in rows.T]
        return dict(zip(("mean", "variance", "skewness", "excess_kurtosis"), means))


def make_generator(seed: int, stream_index: int = 0, iteration: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(stream_index, iteration))
    return np.random.Generator(np.random.PCG64(ss))


def generate_population(config: SimConfig, rng: np.random.Generator):
    """Draw ``n_posts`` posts and ``n_users`` users.

    Returns ``(PostSet, UserSet)``. Activity is the floor of a power-law draw,
    clamped to at least 1; preference is the min-max normalized raw draw.
    """
    v = sample_beta(BetaParams(1.0, config.beta), rng.random(config.n_posts))
    raw_activity = sample_truncated_power_law(config.activity_params(), rng.random(config.n_users))
    activity = np.maximum(np.floor(raw_activity), 1).astype(np.int64)
    pref_raw = sample_truncated_power_law(config.preference_params(), rng.random(config.n_users))
    return PostSet(v), UserSet(activity, pref_raw, unity_normalize(pref_raw))


def qualifying_counts(posts: PostSet, users: UserSet) -> np.ndarray:
    """|Q| per user: the number of posts with attractiveness strictly above the preference."""
    v_sorted = np.sort(posts.attractiveness)
    return v_sorted.size - np.searchsorted(v_sorted, users.preference, side="right")


def run_iteration(
    posts: PostSet,
    users: UserSet,
    rng: np.random.Generator,
    keep_assignments: bool = False,
) -> IterationResult:
    """Apply the like rule once to every user.

    Posts are ranked by descending attractiveness, so each user's qualifying
    set is a prefix of that ranking. Users whose budget covers the prefix like
    all of it; the rest like a random subset of size equal to their budget,
    drawn in user order from ``rng``.
    """
    v = posts.attractiveness
    n_posts = v.size
    order = np.argsort(-v, kind="stable")
    q = qualifying_counts(posts, users)
    a = users.activity
    capped = a < q

    # uncapped users like every post in their prefix: count how many prefixes cover each rank
    prefix_ends = np.bincount(q[~capped], minlength=n_posts + 1)
    by_rank = np.cumsum(prefix_ends[::-1])[::-1][1:].astype(np.int64)

    capped_idx = np.flatnonzero(capped)
    picks = [rng.choice(q[i], size=a[i], replace=False) for i in capped_idx]
    if picks:
        by_rank += np.bincount(np.concatenate(picks), minlength=n_posts)

    likes_per_post = np.empty(n_posts, dtype=np.int64)
    likes_per_post[order] = by_rank
    result = IterationResult(likes_per_user=np.minimum(a, q).astype(np.int64), likes_per_post=likes_per_post)

    if keep_assignments:
        chosen = dict(zip(capped_idx.tolist(), picks))
        result.assignments = [
            np.sort(order[chosen[i]] if i in chosen else order[: q[i]]) for i in range(len(users))
        ]
    return result


def count_violations(users: UserSet, q: np.ndarray, result: IterationResult) -> int:
    """Number of broken conservation / cap invariants in one iteration."""
    bad = int(result.likes_per_user.sum() != result.likes_per_post.sum())
    bad += int(np.count_nonzero(result.likes_per_user != np.minimum(users.activity, q)))
    bad += int(np.count_nonzero(result.likes_per_post < 0))
    return bad


def _moments_or_nan(x) -> tuple:
    try:
        return tuple(float(m) for m in stats.moments(x))
    except ContentSimError:
        mean = float(np.mean(x)) if len(x) else float("nan")
        return (mean, 0.0, float("nan"), float("nan"))


def _simulate_one(config: SimConfig, stream_index: int, iteration: int):
    rng = make_generator(config.seed, stream_index, iteration)
    posts, users = generate_population(config, rng)
    result = run_iteration(posts, users, rng)
    violations = count_violations(users, qualifying_counts(posts, users), result)
    return result, violations


def _task(args):
    return _simulate_one(*args)


def _run_tasks(tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_task, tasks))


def _collect(config: SimConfig, outputs) -> ExperimentResult:
    per_user, per_post, summaries, violations = [], [], [], 0
    for result, bad in outputs:
        per_user.append(result.likes_per_user)
        per_post.append(result.likes_per_post)
        summaries.append(
            IterationSummary(
                total_likes=int(result.likes_per_post.sum()),
                user=_moments_or_nan(result.likes_per_user),
                post=_moments_or_nan(result.likes_per_post),
            )
        )
        violations += bad
    return ExperimentResult(
        config=config,
        likes_per_user=np.concatenate(per_user),
        likes_per_post=np.concatenate(per_post),
        iterations=summaries,
        invariant_violations=violations,
    )


def run_experiment(config: SimConfig, stream_index: int = 0, workers: int = 1) -> ExperimentResult:
    """Run ``config.iterations`` independent population + like passes and pool the counts."""
    tasks = [(config, stream_index, it) for it in range(config.iterations)]
    return _collect(config, _run_tasks(tasks, workers))


def run_sweep(
    base_config: SimConfig, beta_values: Sequence[float], workers: int = 1
) -> dict[float, ExperimentResult]:
    """One experiment per beta, keyed by beta. The i-th beta uses stream index i."""
    betas = [float(b) for b in beta_values]
    if not betas:
        raise ValueError("beta_values must not be empty")
    if len(set(betas)) != len(betas):
        raise ValueError("beta_values must be distinct")
    configs = [replace(base_config, beta=b) for b in betas]
    tasks = [(cfg, i, it) for i, cfg in enumerate(configs) for it in range(cfg.iterations)]
    outputs = _run_tasks(tasks, workers)
    results = {}
    n = base_config.iterations
    for i, cfg in enumerate(configs):
        results[cfg.beta] = _collect(cfg, outputs[i * n : (i + 1) * n])
    return results
