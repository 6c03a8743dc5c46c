"""Like-event logs: streaming CSV parsing, Table-style summaries, and a
deterministic synthetic log generator used as a stand-in for real data."""
from __future__ import annotations

import csv
import io
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field, replace
from typing import IO, Iterable, Iterator

import numpy as np

from .distributions import unity_normalize
from .errors import FixtureSpecError, FormatError

CATEGORIES = ("science", "conspiracy", "baseline")
COLUMNS = ("user_id", "item_id", "page_id", "category", "timestamp")
SCHEMA_VERSION = 1


@dataclass(frozen=True, slots=True)
class LikeEvent:
    user_id: str
    item_id: str
    page_id: str
    category: str
    timestamp: int


@dataclass
class RowError:
    line: int
    message: str


@dataclass
class ParseReport:
    """Collects per-row problems while :func:`parse_events` streams."""

    errors: list[RowError] = field(default_factory=list)
    rows_ok: int = 0

    @property
    def rows_skipped(self) -> int:
        return len(self.errors)


def _text_stream(stream) -> IO[str]:
    if isinstance(stream, (bytes, bytearray)):
        return io.StringIO(stream.decode("utf-8"))
    if isinstance(stream, io.TextIOBase):
        return stream
    if hasattr(stream, "read") and isinstance(stream.read(0), bytes):
        return io.TextIOWrapper(stream, encoding="utf-8", newline="")
    return stream


def _parse_row(row: list[str]) -> LikeEvent:
    if len(row) != len(COLUMNS):
        raise ValueError(f"expected {len(COLUMNS)} fields, got {len(row)}")
    user, item, page, category, ts = (c.strip() for c in row)
    if not (user and item and page):
        raise ValueError("empty id field")
    if category not in CATEGORIES:
        raise ValueError(f"unknown category {category!r}")
    try:
        timestamp = int(ts)
    except ValueError:
        raise ValueError(f"timestamp {ts!r} is not an integer") from None
    if timestamp < 0:
        raise ValueError(f"negative timestamp {timestamp}")
    return LikeEvent(user, item, page, category, timestamp)


def parse_events(stream, report: ParseReport | None = None, delimiter: str = ",") -> Iterator[LikeEvent]:
    """Yield events from a ``user_id,item_id,page_id,category,timestamp`` CSV.

    ``stream`` may be bytes, a binary file or a text file. A missing or wrong
    header raises FormatError on the first ``next()``. Bad rows are skipped and
    recorded in ``report`` with their 1-based line numbers.
    """
    report = ParseReport() if report is None else report
    reader = csv.reader(_text_stream(stream), delimiter=delimiter)
    header = next(reader, None)
    if header is None or tuple(h.strip().lstrip("﻿") for h in header) != COLUMNS:
        raise FormatError(f"missing or invalid header, expected {','.join(COLUMNS)}")
    for row in reader:
        if not row:
            continue
        try:
            ev = _parse_row(row)
        except ValueError as exc:
            report.errors.append(RowError(reader.line_num, str(exc)))
            continue
        report.rows_ok += 1
        yield ev


@dataclass(frozen=True)
class CategoryCounts:
    pages: int = 0
    posts: int = 0
    likes: int = 0
    likers: int = 0


@dataclass(frozen=True)
class DatasetSummary:
    categories: dict[str, CategoryCounts]

    def to_dict(self) -> dict:
        return {c: asdict(self.categories[c]) for c in CATEGORIES}

    @classmethod
    def empty(cls):
        return cls({c: CategoryCounts() for c in CATEGORIES})


def summarize(events: Iterable[LikeEvent]) -> DatasetSummary:
    """Distinct pages, posts and likers plus total likes, per category."""
    pages, posts, likers = defaultdict(set), defaultdict(set), defaultdict(set)
    likes = Counter()
    for ev in events:
        c = ev.category
        pages[c].add(ev.page_id)
        posts[c].add(ev.item_id)
        likers[c].add(ev.user_id)
        likes[c] += 1
    return DatasetSummary(
        {
            c: CategoryCounts(len(pages[c]), len(posts[c]), likes[c], len(likers[c]))
            for c in CATEGORIES
        }
    )


@dataclass
class ConsumptionSamples:
    likes_per_user: dict[str, Counter]
    likes_per_post: dict[str, Counter]

    def _normalized(self, table, category):
        counts = list(table[category].values())
        return unity_normalize(counts) if counts else np.empty(0)

    def user_counts(self, category) -> np.ndarray:
        return np.fromiter(self.likes_per_user[category].values(), dtype=np.int64)

    def post_counts(self, category) -> np.ndarray:
        return np.fromiter(self.likes_per_post[category].values(), dtype=np.int64)

    def normalized_user_counts(self, category) -> np.ndarray:
        return self._normalized(self.likes_per_user, category)

    def normalized_post_counts(self, category) -> np.ndarray:
        return self._normalized(self.likes_per_post, category)


def consumption_samples(events: Iterable[LikeEvent]) -> ConsumptionSamples:
    """Like counts grouped by user and by item within each category.

    Normalized variants rescale counts to [0, 1] within a category.
    """
    per_user = {c: Counter() for c in CATEGORIES}
    per_post = {c: Counter() for c in CATEGORIES}
    for ev in events:
        per_user[ev.category][ev.user_id] += 1
        per_post[ev.category][ev.item_id] += 1
    return ConsumptionSamples(per_user, per_post)


# -- synthetic fixtures -------------------------------------------------------

REGIMES = ("uniform", "pareto")


@dataclass(frozen=True)
class FixtureSpec:
    """Ground truth for a synthetic like log.

    Exactly ``likers`` distinct users like exactly ``posts`` distinct posts,
    ``likes`` times in total, with no repeated (user, post) pair. Per-user
    activity and per-post popularity are uniform or Pareto weighted.
    """

    likes: int = 200
    posts: int = 10
    likers: int | None = None  # None -> min(users, likes)
    users: int | None = None  # size of the user id pool; None -> likers, or 50
    pages: int = 1
    category: str = "baseline"
    regime: str = "uniform"
    pareto_shape: float = 1.2
    t0: int = 1_408_665_600  # 2014-08-22 UTC
    t1: int = 1_420_070_399  # 2014-12-31 23:59:59 UTC
    seed: int = 0

    def resolved(self) -> "FixtureSpec":
        users = self.users
        likers = self.likers
        if users is None:
            users = likers if likers is not None else 50
        if likers is None:
            likers = min(users, self.likes)
        spec = replace(self, users=users, likers=likers)
        spec._validate()
        return spec

    def _validate(self):
        for name in ("likes", "posts", "likers", "users", "pages", "t0", "t1", "seed"):
            if getattr(self, name) < 0:
                raise FixtureSpecError(f"{name} must be non-negative")
        if self.category not in CATEGORIES:
            raise FixtureSpecError(f"category must be one of {CATEGORIES}")
        if self.regime not in REGIMES:
            raise FixtureSpecError(f"regime must be one of {REGIMES}")
        if not self.pareto_shape > 0:
            raise FixtureSpecError("pareto_shape must be positive")
        if self.t1 < self.t0:
            raise FixtureSpecError("t1 must not precede t0")
        if self.likers > self.users:
            raise FixtureSpecError(f"likers ({self.likers}) exceed the user pool ({self.users})")
        if self.likes == 0:
            return
        if self.likers > self.likes:
            raise FixtureSpecError(f"more likers ({self.likers}) than likes ({self.likes})")
        if self.posts > self.likes:
            raise FixtureSpecError(f"more posts ({self.posts}) than likes ({self.likes})")
        if self.likers == 0 or self.posts == 0 or self.pages == 0:
            raise FixtureSpecError("likes > 0 needs at least one liker, post and page")
        if self.likes > self.likers * self.posts:
            raise FixtureSpecError(
                f"{self.likes} likes cannot fit {self.likers} likers x {self.posts} posts "
                "without repeated (user, post) pairs"
            )

    def expected_summary(self) -> DatasetSummary:
        counts = dict.fromkeys(CATEGORIES, CategoryCounts())
        if self.likes > 0:
            counts[self.category] = CategoryCounts(
                min(self.pages, self.posts), self.posts, self.likes, self.likers
            )
        return DatasetSummary(counts)


def _weights(rng, n, regime, shape):
    if regime == "uniform":
        return np.full(n, 1.0 / n)
    w = rng.pareto(shape, n) + 1.0
    return w / w.sum()


def _per_user_counts(rng, spec, weights):
    """Counts >= 1 summing to ``likes``, none above ``posts``."""
    counts = np.ones(spec.likers, dtype=np.int64)
    counts += rng.multinomial(spec.likes - spec.likers, weights)
    while True:
        over = counts > spec.posts
        if not over.any():
            return counts
        excess = int((counts[over] - spec.posts).sum())
        counts[over] = spec.posts
        room = counts < spec.posts
        w = weights * room
        counts += rng.multinomial(excess, w / w.sum())


def generate_fixture(spec: FixtureSpec) -> tuple[list[LikeEvent], DatasetSummary]:
    """Build a synthetic like log and return it with its ground-truth summary.

    Events are sorted by timestamp (ties keep generation order). The same spec
    always yields the same events.
    """
    spec = spec.resolved()
    truth = spec.expected_summary()
    if spec.likes == 0:
        return [], truth
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))

    liker_ids = np.sort(rng.choice(spec.users, size=spec.likers, replace=False))
    counts = _per_user_counts(rng, spec, _weights(rng, spec.likers, spec.regime, spec.pareto_shape))
    post_w = _weights(rng, spec.posts, spec.regime, spec.pareto_shape)

    # cover every post once, cycling through users that still have budget
    chosen = [[] for _ in range(spec.likers)]
    remaining = counts.copy()
    u = 0
    for post in rng.permutation(spec.posts):
        while remaining[u] == 0:
            u = (u + 1) % spec.likers
        chosen[u].append(int(post))
        remaining[u] -= 1
        u = (u + 1) % spec.likers

    for i in np.flatnonzero(remaining):
        w = post_w.copy()
        w[chosen[i]] = 0.0
        if np.count_nonzero(w) < remaining[i]:
            # weights underflowed for some free posts; fall back to equal weights
            w = np.ones(spec.posts)
            w[chosen[i]] = 0.0
        extra = rng.choice(spec.posts, size=remaining[i], replace=False, p=w / w.sum())
        chosen[i].extend(extra.tolist())

    users = np.repeat(liker_ids, counts)
    items = np.concatenate([np.asarray(c, dtype=np.int64) for c in chosen])
    times = rng.integers(spec.t0, spec.t1, size=spec.likes, endpoint=True)
    order = np.argsort(times, kind="stable")
    pages = items % spec.pages
    events = [
        LikeEvent(f"u{users[k]}", f"p{items[k]}", f"page{pages[k]}", spec.category, int(times[k]))
        for k in order
    ]
    return events, truth


def write_events(events: Iterable[LikeEvent], stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(COLUMNS)
    for ev in events:
        writer.writerow((ev.user_id, ev.item_id, ev.page_id, ev.category, ev.timestamp))
