"""JSON-lines capture records to an :class:`InteractionGraph`."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import IO, Iterable, Iterator

from .graph import (
    EdgeKind,
    InteractionGraph,
    UserProfile,
    VertexKind,
    normalize_key,
    normalize_screen_name,
)

log = logging.getLogger(__name__)


class RecordError(ValueError):
    """A capture line that could not be turned into a record."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no
        self.message = message


@dataclass(frozen=True)
class TweetRef:
    tweet_id: str
    author: UserProfile


@dataclass
class TweetRecord:
    tweet_id: str
    author: UserProfile
    text: str = ""
    hashtags: list[str] = field(default_factory=list)
    urls: list[str] = field(default_factory=list)
    media_urls: list[str] = field(default_factory=list)
    mentioned_users: list[UserProfile] = field(default_factory=list)
    retweet_of: TweetRef | None = None
    reply_to: TweetRef | None = None
    quote_of: TweetRef | None = None
    captured_at: str = ""


@dataclass
class CaptureStats:
    counts: dict[VertexKind, int]
    total_vertices: int
    total_edges: int
    first_captured_at: str | None = None
    last_captured_at: str | None = None

    def rows(self) -> list[tuple[str, str]]:
        out = [(k.value, str(self.counts[k])) for k in sorted(self.counts, key=lambda k: k.value)]
        out.append(("total_vertices", str(self.total_vertices)))
        out.append(("total_edges", str(self.total_edges)))
        out.append(("first_captured_at", self.first_captured_at or ""))
        out.append(("last_captured_at", self.last_captured_at or ""))
        return out


def _profile(obj, line_no: int, what: str) -> UserProfile:
    if isinstance(obj, str):
        obj = {"screen_name": obj}
    if not isinstance(obj, dict):
        raise RecordError(line_no, f"{what} must be an object")
    name = obj.get("screen_name")
    if not isinstance(name, str) or not normalize_screen_name(name):
        raise RecordError(line_no, f"{what}.screen_name missing")
    try:
        return UserProfile(
            screen_name=name,
            display_name=str(obj.get("display_name") or ""),
            followers_count=int(obj.get("followers_count") or 0),
            friends_count=int(obj.get("friends_count") or 0),
            verified=bool(obj.get("verified", False)),
            location=str(obj.get("location") or ""),
        )
    except (TypeError, ValueError) as exc:
        raise RecordError(line_no, f"{what}: {exc}") from None


def _ref(obj, line_no: int, what: str) -> TweetRef | None:
    if obj is None:
        return None
    if not isinstance(obj, dict):
        raise RecordError(line_no, f"{what} must be an object")
    tid = obj.get("tweet_id")
    if tid is None or str(tid) == "":
        raise RecordError(line_no, f"{what}.tweet_id missing")
    return TweetRef(str(tid), _profile(obj.get("author"), line_no, f"{what}.author"))


def _str_list(obj, line_no: int, what: str) -> list[str]:
    if obj is None:
        return []
    if not isinstance(obj, list):
        raise RecordError(line_no, f"{what} must be a list")
    return [str(x) for x in obj if str(x).strip()]


def parse_record(line: str, line_no: int = 1) -> TweetRecord:
    """Parse one JSON object into a :class:`TweetRecord`; unknown keys are ignored."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise RecordError(line_no, f"malformed JSON ({exc.msg})") from None
    if not isinstance(obj, dict):
        raise RecordError(line_no, "record is not a JSON object")
    tid = obj.get("tweet_id")
    if tid is None or str(tid) == "":
        raise RecordError(line_no, "tweet_id missing")
    if obj.get("author") is None:
        raise RecordError(line_no, "author missing")
    mentions = obj.get("mentioned_users") or []
    if not isinstance(mentions, list):
        raise RecordError(line_no, "mentioned_users must be a list")
    rec = TweetRecord(
        tweet_id=str(tid),
        author=_profile(obj["author"], line_no, "author"),
        text=str(obj.get("text") or ""),
        hashtags=_str_list(obj.get("hashtags"), line_no, "hashtags"),
        urls=_str_list(obj.get("urls"), line_no, "urls"),
        media_urls=_str_list(obj.get("media_urls"), line_no, "media_urls"),
        mentioned_users=[_profile(m, line_no, "mentioned_users[]") for m in mentions],
        retweet_of=_ref(obj.get("retweet_of"), line_no, "retweet_of"),
        reply_to=_ref(obj.get("reply_to"), line_no, "reply_to"),
        quote_of=_ref(obj.get("quote_of"), line_no, "quote_of"),
        captured_at=str(obj.get("captured_at") or ""),
    )
    if rec.retweet_of is not None and rec.quote_of is not None:
        raise RecordError(line_no, "retweet_of and quote_of are mutually exclusive")
    return rec


def read_records(lines: Iterable[str], errors: list[RecordError] | None = None) -> Iterator[TweetRecord]:
    """Yield records from JSON lines, skipping blank lines.

    Bad lines are appended to ``errors`` (when given) and otherwise skipped.
    """
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            yield parse_record(line, line_no)
        except RecordError as exc:
            log.warning("skipping %s", exc)
            if errors is not None:
                errors.append(exc)


def read_seeds(stream: IO[str] | Iterable[str]) -> list[str]:
    """One handle per line; ``@`` optional, case-insensitive, ``#`` starts a comment."""
    seeds = []
    for line in stream:
        name = normalize_screen_name(line.split("#", 1)[0])
        if name and name not in seeds:
            seeds.append(name)
    return seeds


def _parse_time(text: str) -> datetime | None:
    if not text:
        return None
    try:
        ts = datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError:
        return None
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


class GraphBuilder:
    """Incremental record-to-graph builder; records are deduplicated by tweet id."""

    def __init__(self, seeds: Iterable[str]):
        self.seeds = {normalize_screen_name(s) for s in seeds if normalize_screen_name(s)}
        if not self.seeds:
            raise ValueError("seed list is empty")
        self.graph = InteractionGraph()
        self.seen: set[str] = set()
        self.skipped_duplicates = 0
        self._first: datetime | None = None
        self._last: datetime | None = None

    def _user(self, profile: UserProfile) -> int:
        profile = replace(profile, is_seed=profile.screen_name in self.seeds)
        return self.graph.add_vertex(VertexKind.USER, profile.screen_name, profile)

    def _attach(self, t: int, kind: VertexKind, key: str, edge: EdgeKind) -> None:
        if normalize_key(kind, key):
            self.graph.add_edge(t, self.graph.add_vertex(kind, key), edge)

    def _tweet(self, tweet_id: str, author: UserProfile) -> int:
        g = self.graph
        existing = g.vertex_id(VertexKind.TWEET, tweet_id)
        if existing is not None:
            # a tweet's author is fixed by its first appearance
            self._user(author)
            return existing
        u = self._user(author)
        t = g.add_vertex(VertexKind.TWEET, tweet_id)
        g.add_edge(u, t, EdgeKind.POSTED)
        return t

    def add(self, rec: TweetRecord) -> bool:
        """Add one record; returns False if its tweet id was already ingested."""
        if rec.tweet_id in self.seen:
            self.skipped_duplicates += 1
            return False
        self.seen.add(rec.tweet_id)
        g = self.graph
        t = self._tweet(rec.tweet_id, rec.author)
        for m in rec.mentioned_users:
            v = self._user(m)
            g.add_edge(t, v, EdgeKind.MENTIONS)
        for tag in rec.hashtags:
            self._attach(t, VertexKind.HASHTAG, tag, EdgeKind.HAS_HASHTAG)
        for url in rec.urls:
            self._attach(t, VertexKind.LINK, url, EdgeKind.HAS_LINK)
        for url in rec.media_urls:
            self._attach(t, VertexKind.MEDIA, url, EdgeKind.HAS_MEDIA)
        for ref, kind in (
            (rec.retweet_of, EdgeKind.RETWEET_OF),
            (rec.reply_to, EdgeKind.REPLY_TO),
            (rec.quote_of, EdgeKind.QUOTE_OF),
        ):
            if ref is None or ref.tweet_id == rec.tweet_id:
                continue
            g.add_edge(t, self._tweet(ref.tweet_id, ref.author), kind)
        ts = _parse_time(rec.captured_at)
        if ts is not None:
            self._first = ts if self._first is None else min(self._first, ts)
            self._last = ts if self._last is None else max(self._last, ts)
        return True

    def finish(self) -> InteractionGraph:
        if self._first is not None:
            fmt = "%Y-%m-%dT%H:%M:%SZ"
            self.graph.capture_window = (self._first.strftime(fmt), self._last.strftime(fmt))
        return self.graph.freeze()


def build_graph(records: Iterable[TweetRecord], seeds: Iterable[str]) -> InteractionGraph:
    """Build the interaction graph of a record stream.

    Vertex ids follow first appearance. User profiles are max-merged across
    records and flagged as seeds when their handle is in ``seeds``.
    """
    builder = GraphBuilder(seeds)
    for rec in records:
        builder.add(rec)
    return builder.finish()


def capture_stats(g: InteractionGraph) -> CaptureStats:
    counts = g.kind_counts()
    window = g.capture_window or (None, None)
    return CaptureStats(counts, g.n_vertices, g.n_edges, window[0], window[1])
