"""Synthetic capture files with a manifest of what they should ingest to.

The manifest is tracked here from the generator's own choices (sets of
canonical keys and distinct edge triples), without going through the
graph builder, so it can serve as an independent check on ingestion.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone

import numpy as np

# 2018 presidential candidate handles, used as seeds and hub users
CANDIDATE_HANDLES = [
    "alvarodias_", "cabodaciolo", "cirogomes", "haddad_fernando", "geraldoalckmin", "guilhermeboulos",
    "meirelles", "jairbolsonaro", "joaoamoedonovo", "joaogoulart54", "eymaeloficial", "marinasilva",
]

CAPTURE_START = datetime(2018, 8, 3, tzinfo=timezone.utc)

# vertex counts per kind of the published capture
PUBLISHED_COUNTS = {"User": 99615, "Tweet": 133305, "Hashtag": 9335, "Link": 7714, "Media": 15579}


@dataclass
class CaptureSpec:
    n_records: int = 1000
    n_users: int = 600
    n_external_tweets: int = 250
    n_hashtags: int = 120
    n_links: int = 80
    n_media: int = 150
    mention_mean: float = 1.3
    hashtag_mean: float = 0.6
    internal_ref_rate: float = 0.1
    duplicate_lines: int = 20
    bad_lines: int = 0
    seed: int = 0
    seeds: list[str] = field(default_factory=lambda: list(CANDIDATE_HANDLES))

    @classmethod
    def published_scale(cls, seed: int = 0) -> "CaptureSpec":
        """Parameters reproducing the published per-kind vertex counts exactly."""
        n_records = 100_000
        return cls(
            n_records=n_records,
            n_users=PUBLISHED_COUNTS["User"],
            n_external_tweets=PUBLISHED_COUNTS["Tweet"] - n_records,
            n_hashtags=PUBLISHED_COUNTS["Hashtag"],
            n_links=PUBLISHED_COUNTS["Link"],
            n_media=PUBLISHED_COUNTS["Media"],
            mention_mean=1.35,
            hashtag_mean=0.5,
            internal_ref_rate=0.08,
            duplicate_lines=500,
            bad_lines=0,
            seed=seed,
        )


def _slots(rng: np.random.Generator, pool: int, n_slots: int, skew: float = 0.9) -> np.ndarray:
    """``n_slots`` draws from ``range(pool)`` covering every item when possible.

    The first ``pool`` slots enumerate the pool; the rest follow a power law
    favouring low indices. The result is shuffled.
    """
    if n_slots == 0 or pool == 0:
        return np.zeros(0, dtype=np.int64)
    cover = rng.permutation(pool)[: min(pool, n_slots)]
    weights = 1.0 / np.arange(1, pool + 1) ** skew
    extra = rng.choice(pool, size=n_slots - len(cover), p=weights / weights.sum())
    return rng.permutation(np.concatenate([cover, extra]).astype(np.int64))


def _variant_tag(rng: np.random.Generator, canonical: str) -> str:
    tag = "".join(ch.upper() if rng.random() < 0.3 else ch for ch in canonical)
    return ("#" + tag) if rng.random() < 0.5 else tag


def generate_capture(spec: CaptureSpec) -> tuple[list[str], dict]:
    """JSON lines plus a manifest of expected vertex and edge counts."""
    rng = np.random.default_rng(spec.seed)
    R = spec.n_records
    names = list(spec.seeds) + [f"user{i:06d}" for i in range(max(spec.n_users - len(spec.seeds), 0))]
    names = names[: spec.n_users]
    followers = np.rint(rng.lognormal(7.0, 2.5, len(names))).astype(np.int64)
    friends = np.rint(rng.lognormal(6.0, 1.5, len(names))).astype(np.int64)

    mention_counts = rng.poisson(spec.mention_mean, R)
    hashtag_counts = rng.poisson(spec.hashtag_mean, R)
    link_slots = _slots(rng, spec.n_links, max(spec.n_links, R // 8))
    media_slots = _slots(rng, spec.n_media, max(spec.n_media, R // 6))
    link_at = rng.choice(R, size=len(link_slots), replace=len(link_slots) > R)
    media_at = rng.choice(R, size=len(media_slots), replace=len(media_slots) > R)

    n_ext = spec.n_external_tweets
    user_slots = _slots(rng, len(names), R + n_ext + int(mention_counts.sum()))
    tag_slots = _slots(rng, spec.n_hashtags, int(hashtag_counts.sum()))
    ext_at = rng.choice(R, size=n_ext, replace=n_ext > R)
    ext_kind = rng.integers(0, 3, size=n_ext)

    links_of: dict[int, list[int]] = {}
    for r, item in zip(link_at.tolist(), link_slots.tolist()):
        links_of.setdefault(r, []).append(item)
    media_of: dict[int, list[int]] = {}
    for r, item in zip(media_at.tolist(), media_slots.tolist()):
        media_of.setdefault(r, []).append(item)
    ext_of: dict[int, list[tuple[int, int]]] = {}
    for j, (r, k) in enumerate(zip(ext_at.tolist(), ext_kind.tolist())):
        ext_of.setdefault(r, []).append((j, k))

    def profile(u: int, drift: bool = True) -> dict:
        bump = int(rng.integers(0, 50)) if drift else 0
        return {
            "screen_name": names[u] if rng.random() < 0.8 else "@" + names[u].upper(),
            "display_name": names[u].title(),
            "followers_count": int(followers[u]) + bump,
            "friends_count": int(friends[u]) + bump,
            "verified": bool(u < len(spec.seeds)),
            "location": "",
        }

    users: set[str] = set()
    tweets: set[str] = set()
    tags: set[str] = set()
    links: set[str] = set()
    media: set[str] = set()
    edges: set[tuple[str, str, str]] = set()
    tweet_author: dict[str, str] = {}

    def posted(tid: str, author: str) -> None:
        users.add(author)
        if tid not in tweets:
            tweets.add(tid)
            tweet_author[tid] = author
            edges.add((author, "t:" + tid, "Posted"))

    lines: list[str] = []
    ui = iter(user_slots.tolist())
    ti = iter(tag_slots.tolist())
    ref_kinds = ("retweet_of", "reply_to", "quote_of")
    for r in range(R):
        tid = f"{r + 1:09d}"
        author = next(ui)
        rec: dict = {"tweet_id": tid, "author": profile(author), "text": f"synthetic tweet {r}"}
        posted(tid, names[author])
        t = "t:" + tid

        mentioned = [next(ui) for _ in range(int(mention_counts[r]))]
        rec["mentioned_users"] = [
            profile(u) if rng.random() < 0.5 else {"screen_name": names[u]} for u in mentioned
        ]
        for u in mentioned:
            users.add(names[u])
            edges.add((t, "u:" + names[u], "Mentions"))

        rec_tags = [next(ti) for _ in range(int(hashtag_counts[r]))]
        rec["hashtags"] = [_variant_tag(rng, f"tag{h:05d}") for h in rec_tags]
        for h in rec_tags:
            tags.add(f"tag{h:05d}")
            edges.add((t, "h:" + f"tag{h:05d}", "HasHashtag"))

        rec["urls"] = [f"https://example.org/l/{i}" for i in links_of.get(r, [])]
        rec["media_urls"] = [f"https://pbs.example.org/m/{i}.jpg" for i in media_of.get(r, [])]
        for url in rec["urls"]:
            links.add(url)
            edges.add((t, "l:" + url, "HasLink"))
        for url in rec["media_urls"]:
            media.add(url)
            edges.add((t, "m:" + url, "HasMedia"))

        refs: dict[str, tuple[str, str]] = {}
        for j, k in ext_of.get(r, []):
            # at most one external reference per record unless n_ext > R
            kind = ref_kinds[k]
            while kind in refs or (kind == "quote_of" and "retweet_of" in refs) or (
                kind == "retweet_of" and "quote_of" in refs
            ):
                kind = "reply_to" if "reply_to" not in refs else None
                if kind is None:
                    break
            author = names[next(ui)]
            if kind is not None:
                refs[kind] = (f"x{j:09d}", author)
        if r > 0 and rng.random() < spec.internal_ref_rate:
            target = f"{int(rng.integers(0, r)) + 1:09d}"
            kind = ref_kinds[int(rng.integers(0, 3))]
            exclusive = {"retweet_of": "quote_of", "quote_of": "retweet_of"}.get(kind)
            if kind not in refs and exclusive not in refs:
                refs[kind] = (target, tweet_author[target])
        for kind, (ref_id, ref_author) in refs.items():
            rec[kind] = {"tweet_id": ref_id, "author": {"screen_name": ref_author}}
            posted(ref_id, ref_author)
            edges.add((t, "t:" + ref_id, {"retweet_of": "RetweetOf", "reply_to": "ReplyTo", "quote_of": "QuoteOf"}[kind]))

        stamp = CAPTURE_START + timedelta(days=r * 60 // max(R, 1), seconds=r % 86400)
        rec["captured_at"] = stamp.strftime("%Y-%m-%dT%H:%M:%SZ")
        lines.append(json.dumps(rec, ensure_ascii=False))

    dup_src = rng.integers(0, R, size=spec.duplicate_lines) if R else []
    for i in dup_src:
        pos = int(rng.integers(int(i) + 1, len(lines) + 1))
        lines.insert(pos, lines[int(i)])
    for _ in range(spec.bad_lines):
        lines.insert(int(rng.integers(0, len(lines) + 1)), "not json {")

    counts = {
        "User": len(users), "Tweet": len(tweets), "Hashtag": len(tags), "Link": len(links), "Media": len(media),
    }
    manifest = {
        "records": R,
        "duplicate_lines": spec.duplicate_lines,
        "bad_lines": spec.bad_lines,
        "counts": counts,
        "total_vertices": sum(counts.values()),
        "total_edges": len(edges),
        "seed_users_present": sorted(set(spec.seeds) & users),
    }
    return lines, manifest
