"""Profile, content, self-mention and network search.

Each search takes a connector and the queried user's source-network id and
returns an :class:`AlgorithmOutcome` describing candidate identities on the
target network.
"""

from __future__ import annotations

import logging
import re
from collections import defaultdict

from .connectors import (
    DEFAULT_POST_CAP,
    NETWORK_KINDS,
    ConnectorError,
    FixtureConnector,
    ResolutionFailed,
    ResolvedTarget,
)
from .model import (
    CONTENT,
    NETWORK,
    NL,
    PROFILE,
    SELF_MENTION,
    SU,
    URL,
    AlgorithmOutcome,
    Candidate,
    Identity,
    assign_ranks,
    dedupe_candidates,
    rank_by_score,
)
from .similarity import cosine_text, histogram_similarity, jaro, name_match

log = logging.getLogger(__name__)

QUERY_CHARS = 75
MIN_QUERY_CHARS = 5
RECENT_POSTS = 100
NAME_SEARCH_CAP = 60
CONFIRM_TALLY = 2

_NON_ASCII = re.compile(r"[^\x00-\x7f]")


def process_post(text: str) -> str:
    """Query form of a post: first 75 characters, non-ASCII removed, trimmed."""
    return _NON_ASCII.sub("", text[:QUERY_CHARS]).strip()


def _try_resolve(conn: FixtureConnector, url: str) -> ResolvedTarget | None:
    try:
        return conn.resolve_url(url)
    except ResolutionFailed as exc:
        log.debug("%s", exc)
        return None


def profile_search(conn: FixtureConnector, nemo_id: str, *, exhaustive: bool = False) -> AlgorithmOutcome:
    """Search the target network with the queried user's profile attributes.

    A URL field that resolves to a target identity confirms it immediately
    (self-identification). Otherwise the same-username hit and the
    name + location hits form the non-ranked set, which is then ranked by
    profile-image similarity. ``exhaustive`` runs every sub-method even after
    a self-identification, for per-sub-method attribution.
    """
    with conn.metered() as meter:
        nemo = conn.lookup_identity(conn.source, nemo_id)
        found: list[Candidate] = []
        confirmed = None

        if nemo.url_field:
            res = _try_resolve(conn, nemo.url_field)
            if res is not None and res.target_identity is not None:
                confirmed = res.target_identity
                found.append(Candidate(confirmed, {PROFILE: 1.0}, frozenset({PROFILE}), frozenset({URL})))
                if not exhaustive:
                    return AlgorithmOutcome(
                        PROFILE,
                        tuple(assign_ranks(found)),
                        confirmed,
                        meter.requests,
                        meter.elapsed,
                        non_ranked=(confirmed.user_id,),
                    )

        hit = conn.search_by_username(nemo.username)
        if hit is not None:
            found.append(Candidate(hit, {}, frozenset({PROFILE}), frozenset({SU})))
        for ident in conn.search_by_name_location(nemo.display_name, nemo.location, NAME_SEARCH_CAP):
            found.append(Candidate(ident, {}, frozenset({PROFILE}), frozenset({NL})))

        pool = dedupe_candidates(found)
        non_ranked = tuple(c.user_id for c in pool)
        ranked = _rank_by_image(conn, nemo, pool, confirmed)
        return AlgorithmOutcome(PROFILE, tuple(ranked), confirmed, meter.requests, meter.elapsed, non_ranked)


def _rank_by_image(conn, nemo: Identity, pool: list[Candidate], confirmed: Identity | None) -> list[Candidate]:
    nemo_img = conn.image(nemo.profile_image)
    head, scored, unscored = [], [], []
    for cand in pool:
        if confirmed is not None and cand.key == confirmed.key:
            head.append(Candidate(cand.identity, {PROFILE: 1.0}, cand.provenance, cand.tags))
            continue
        img = conn.image(cand.identity.profile_image)
        if nemo_img is None or img is None:
            unscored.append(Candidate(cand.identity, {PROFILE: 0.0}, cand.provenance, cand.tags, no_image=True))
        else:
            sim = histogram_similarity(nemo_img, img)
            scored.append(Candidate(cand.identity, {PROFILE: sim}, cand.provenance, cand.tags))
    scored.sort(key=lambda c: (-c.scores[PROFILE], c.user_id))
    # no-image candidates keep their non-ranked order below every scored one
    return assign_ranks(head + scored + unscored)


def content_search(
    conn: FixtureConnector, nemo_id: str, *, recent: int = RECENT_POSTS, cap: int = DEFAULT_POST_CAP
) -> AlgorithmOutcome:
    """Find target users who posted the queried user's recent posts.

    Candidates are scored by tf cosine between the original post and the
    candidate's matching post; content alone never confirms an identity.
    """
    with conn.metered() as meter:
        nemo = conn.lookup_identity(conn.source, nemo_id)
        best: dict[tuple[str, str], tuple[float, Identity]] = {}
        for post in conn.fetch_recent_posts(nemo, recent):
            query = process_post(post.text)
            if len(query) < MIN_QUERY_CHARS:
                continue
            for author, match in conn.search_posts_by_text(query, cap):
                score = cosine_text(post.text, match.text)
                prev = best.get(author.key)
                if prev is None or score > prev[0]:
                    best[author.key] = (score, author)
        cands = [Candidate(ident, {CONTENT: s}, frozenset({CONTENT})) for s, ident in best.values()]
        ranked = rank_by_score(cands, lambda c: c.scores[CONTENT])
        return AlgorithmOutcome(CONTENT, tuple(ranked), None, meter.requests, meter.elapsed)


def self_mention_search(conn: FixtureConnector, nemo_id: str, *, recent: int = RECENT_POSTS) -> AlgorithmOutcome:
    """Resolve URLs in recent posts to target-network persons, ranked by username Jaro.

    The top-ranked candidate is confirmed only when it is also among the most
    frequently referenced ones.
    """
    with conn.metered() as meter:
        nemo = conn.lookup_identity(conn.source, nemo_id)
        mentions: dict[tuple[str, str], set[int]] = defaultdict(set)
        idents: dict[tuple[str, str], Identity] = {}
        resolved: dict[str, ResolvedTarget | None] = {}
        for i, post in enumerate(conn.fetch_recent_posts(nemo, recent)):
            for url in post.urls:
                if url not in resolved:
                    resolved[url] = _try_resolve(conn, url)
                res = resolved[url]
                if res is None or res.target_identity is None:
                    continue
                t = res.target_identity
                if t.network != conn.target or t.entity_class != "person":
                    continue
                mentions[t.key].add(i)
                idents[t.key] = t

        handle = nemo.handle
        cands = [
            Candidate(idents[k], {SELF_MENTION: jaro(handle, idents[k].handle)}, frozenset({SELF_MENTION}),
                      mention_count=len(posts))
            for k, posts in mentions.items()
        ]
        ranked = rank_by_score(cands, lambda c: c.scores[SELF_MENTION])
        confirmed = None
        if ranked:
            top_count = max(c.mention_count for c in ranked)
            if ranked[0].mention_count == top_count:
                confirmed = ranked[0].identity
        return AlgorithmOutcome(SELF_MENTION, tuple(ranked), confirmed, meter.requests, meter.elapsed)


def network_search(conn: FixtureConnector, nemo_id: str, *, stop_at_confirmation: bool = True) -> AlgorithmOutcome:
    """Map the queried user's network onto the target and look for them in public friend lists.

    Members whose URL field resolves to a target identity are mapped; a
    name-matching friend listed by at least two mapped members is confirmed.
    Networks are visited follower, followee, friend; by default the search
    stops as soon as some identity reaches the confirmation tally.
    """
    with conn.metered() as meter:
        nemo = conn.lookup_identity(conn.source, nemo_id)
        tally: dict[tuple[str, str], set[str]] = defaultdict(set)
        idents: dict[tuple[str, str], Identity] = {}
        visited: set[str] = set()
        done = False
        for kind in NETWORK_KINDS:
            if done:
                break
            for member in conn.fetch_network(nemo, kind):
                if member.user_id in visited:
                    continue
                visited.add(member.user_id)
                if not member.url_field:
                    continue
                res = _try_resolve(conn, member.url_field)
                if res is None or res.target_identity is None:
                    continue
                mapped = res.target_identity
                try:
                    friends = conn.fetch_friend_list(mapped)
                except ConnectorError as exc:
                    log.debug("%s", exc)
                    continue
                if not friends:
                    continue
                for friend in friends:
                    if name_match(nemo.display_name, friend.display_name):
                        tally[friend.key].add(mapped.user_id)
                        idents[friend.key] = friend
                if stop_at_confirmation and any(len(v) >= CONFIRM_TALLY for v in tally.values()):
                    done = True
                    break

        if not tally:
            return AlgorithmOutcome(NETWORK, (), None, meter.requests, meter.elapsed)
        top = max(len(v) for v in tally.values())
        cands = [Candidate(idents[k], {NETWORK: len(v) / top}, frozenset({NETWORK})) for k, v in tally.items()]
        ranked = rank_by_score(cands, lambda c: c.scores[NETWORK])
        confirmed = ranked[0].identity if len(tally[ranked[0].key]) >= CONFIRM_TALLY else None
        return AlgorithmOutcome(NETWORK, tuple(ranked), confirmed, meter.requests, meter.elapsed)


SEARCHES = {
    PROFILE: profile_search,
    CONTENT: content_search,
    SELF_MENTION: self_mention_search,
    NETWORK: network_search,
}
