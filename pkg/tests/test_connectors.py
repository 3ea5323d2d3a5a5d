import math
import threading

import pytest

from idsearch.connectors import (
    CALL_LATENCY,
    HOP_LATENCY,
    PAGE_SCAN_LATENCY,
    Clock,
    FixtureConnector,
    NotFound,
    RateLimiter,
    RateLimitPolicy,
    ResolutionFailed,
    known_network,
)
from idsearch.corpus import Page
from helpers import build, src, tgt


def test_clock_monotone():
    c = Clock()
    c.advance(1.5)
    c.advance_to(1.0)
    assert c.now == 1.5
    with pytest.raises(ValueError):
        c.advance(-1)


def test_rate_limit_policy_parse():
    assert RateLimitPolicy.parse("350/3600") == RateLimitPolicy(350, 3600.0)
    for bad in ("350", "x/1", "0/10", "5/0"):
        with pytest.raises(ValueError):
            RateLimitPolicy.parse(bad)


def test_limiter_350_free_then_sleep_to_boundary():
    clock = Clock()
    lim = RateLimiter(RateLimitPolicy(), clock)
    for _ in range(350):
        assert lim.acquire() == 0.0
    assert clock.now == 0.0
    assert lim.acquire() == 3600.0
    assert clock.now == 3600.0
    assert lim.remaining == 349


def test_limiter_windows_are_aligned():
    clock = Clock(3500.0)
    lim = RateLimiter(RateLimitPolicy(2, 3600), clock)
    lim.acquire(2)
    assert lim.acquire() == pytest.approx(100.0)
    assert clock.now == 3600.0
    assert lim.sleeps == 1


def test_limiter_refills_when_clock_moves_on():
    clock = Clock()
    lim = RateLimiter(RateLimitPolicy(3, 10), clock)
    lim.acquire(3)
    clock.advance(25)
    assert lim.remaining == 3
    assert lim.acquire(3) == 0.0


def test_limiter_is_thread_safe():
    clock = Clock()
    lim = RateLimiter(RateLimitPolicy(100, 60), clock)
    threads = [threading.Thread(target=lambda: [lim.acquire() for _ in range(50)]) for _ in range(6)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    # 300 tokens at 100 per window: exactly two refills
    assert lim.sleeps == 2
    assert clock.now == 120.0


@pytest.fixture
def corpus():
    people = [
        src("s1", "nemo", "Nemo Fish", location="Reef", url_field="target.net/nemo"),
        src("s2", "dory", "Dory Blue", url_field="http://blog.example/dory"),
        src("s3", "marlin", "Marlin Fish"),
        tgt("t1", "Nemo", "Nemo Fish", location="Great Reef", friendlist_public=True),
        tgt("t2", "dory_b", "Dory Blue", searchable=False, posts_public=False),
        tgt("t3", "nemo2", "Nemo Clown", location="Reef City"),
        tgt("t4", "fishco", "Fish Co", entity_class="page"),
        tgt("t5", "gill", "Gill Moorish", friendlist_public=False),
    ]
    pages = [
        Page("http://blog.example/dory", links=("https://instagram.com/dory", "https://www.target.net/dory_b")),
        Page("http://sho.rt/a", redirects_to="http://sho.rt/b"),
        Page("http://sho.rt/b", redirects_to="https://target.net/nemo/photos/3"),
        Page("http://loop/1", redirects_to="http://loop/2"),
        Page("http://loop/2", redirects_to="http://loop/1"),
        Page("http://plain.example/", links=("http://elsewhere.example/",)),
        *[Page(f"http://chain/{i}", redirects_to=f"http://chain/{i + 1}") for i in range(6)],
    ]
    posts = [("s1", "source", f"post {i}", 100 + i) for i in range(250)]
    posts += [("t1", "target", "hello from the reef", 5), ("t2", "target", "hello from the reef", 6)]
    follows = [("s2", "s1"), ("s3", "s1"), ("s1", "s3")]
    friends = [("t1", "t3"), ("t1", "t5")]
    return build(people, posts, follows, friends, pages)


def test_lookup_identity(corpus):
    conn = FixtureConnector(corpus)
    assert conn.lookup_identity("source", "s1").username == "nemo"
    with pytest.raises(NotFound):
        conn.lookup_identity("source", "nope")
    assert conn.requests == 2
    assert conn.clock.now == pytest.approx(2 * CALL_LATENCY)


def test_search_by_username(corpus):
    conn = FixtureConnector(corpus)
    assert conn.search_by_username("@NEMO").user_id == "t1"
    assert conn.search_by_username("nobody") is None
    assert conn.search_by_username("dory_b") is None  # not searchable


def test_search_by_name_location(corpus):
    conn = FixtureConnector(corpus)
    assert [i.user_id for i in conn.search_by_name_location("Nemo Fish", "reef")] == ["t1", "t3"]
    assert [i.user_id for i in conn.search_by_name_location("Nemo Fish")] == ["t1", "t3", "t4"]
    assert conn.search_by_name_location("Zed Zulu") == []
    assert [i.user_id for i in conn.search_by_name_location("Dory Blue")] == []


def test_name_search_cap():
    people = [tgt(f"t{i:03d}", f"ann{i}", "Ann Lee") for i in range(75)]
    conn = FixtureConnector(build(people))
    hits = conn.search_by_name_location("Ann Lee", None, 60)
    assert len(hits) == 60
    assert hits == sorted(hits, key=lambda i: i.user_id)


def test_search_posts_by_text_skips_private_authors(corpus):
    conn = FixtureConnector(corpus)
    hits = conn.search_posts_by_text("HELLO from the")
    assert [a.user_id for a, _ in hits] == ["t1"]


def test_fetch_recent_posts(corpus):
    conn = FixtureConnector(corpus)
    posts = conn.fetch_recent_posts(corpus.get("source", "s1"))
    assert len(posts) == 100
    ts = [p.timestamp for p in posts]
    assert ts == sorted(ts, reverse=True) and ts[0] == 349
    assert len(conn.fetch_recent_posts(corpus.get("target", "t1"))) == 1


def test_fetch_network_kinds(corpus):
    conn = FixtureConnector(corpus)
    nemo = corpus.get("source", "s1")
    assert [m.user_id for m in conn.fetch_network(nemo, "follower")] == ["s2", "s3"]
    assert [m.user_id for m in conn.fetch_network(nemo, "followee")] == ["s3"]
    assert [m.user_id for m in conn.fetch_network(nemo, "friend")] == ["s3"]
    assert conn.fetch_network(corpus.get("source", "s2"), "friend") == []
    assert conn.requests == 4  # empty pages still cost one request


def test_fetch_network_paging():
    people = [src("n", "nemo", "Nemo")] + [src(f"f{i:04d}", f"f{i}", "F") for i in range(767)]
    corpus = build(people, follows=[(f"f{i:04d}", "n") for i in range(767)])
    conn = FixtureConnector(corpus)
    assert len(conn.fetch_network(corpus.get("source", "n"), "follower")) == 767
    assert conn.requests == math.ceil(767 / 100) == 8


def test_fetch_friend_list(corpus):
    conn = FixtureConnector(corpus)
    assert [f.user_id for f in conn.fetch_friend_list(corpus.get("target", "t1"))] == ["t3", "t5"]
    assert conn.fetch_friend_list(corpus.get("target", "t5")) is None
    assert conn.fetch_friend_list(corpus.get("target", "t4")) is None


def test_resolve_direct(corpus):
    conn = FixtureConnector(corpus)
    res = conn.resolve_url("target.net/nemo")
    assert res.target_identity.user_id == "t1" and not res.via_page_scan
    assert conn.clock.now == pytest.approx(HOP_LATENCY)


def test_resolve_via_page(corpus):
    conn = FixtureConnector(corpus)
    res = conn.resolve_url("http://blog.example/dory")
    assert res.target_identity.user_id == "t2" and res.via_page_scan
    assert conn.requests == 2
    assert conn.clock.now == pytest.approx(HOP_LATENCY + PAGE_SCAN_LATENCY)


def test_resolve_redirects(corpus):
    conn = FixtureConnector(corpus)
    res = conn.resolve_url("http://sho.rt/a")
    assert res.target_identity.user_id == "t1"
    assert res.final_url == "https://target.net/nemo/photos/3"
    assert conn.requests == 3


def test_resolve_failures(corpus):
    conn = FixtureConnector(corpus)
    with pytest.raises(ResolutionFailed, match="loop"):
        conn.resolve_url("http://loop/1")
    with pytest.raises(ResolutionFailed, match="too many"):
        conn.resolve_url("http://chain/0")
    with pytest.raises(ResolutionFailed, match="unknown page"):
        conn.resolve_url("http://nowhere.example/x")


def test_resolve_non_profile_targets(corpus):
    conn = FixtureConnector(corpus)
    assert conn.resolve_url("https://instagram.com/p/abc").target_identity is None
    assert conn.resolve_url("http://plain.example/").target_identity is None
    assert conn.resolve_url("https://target.net/").target_identity is None
    assert known_network("www.youtu.be".removeprefix("www.")) == "Youtube"
    assert known_network("nemo.tumblr.com") == "Tumblr"
    assert known_network("example.com") is None


def test_metered_attribution(corpus):
    conn = FixtureConnector(corpus)
    with conn.metered() as outer:
        conn.lookup_identity("source", "s1")
        with conn.metered() as inner:
            conn.resolve_url("target.net/nemo")
    assert (outer.requests, inner.requests) == (2, 1)
    assert outer.elapsed == pytest.approx(CALL_LATENCY + HOP_LATENCY)


def test_rate_limit_sleep_counts_into_elapsed(corpus):
    conn = FixtureConnector(corpus, RateLimitPolicy(2, 100))
    with conn.metered() as m:
        for _ in range(3):
            conn.lookup_identity("source", "s1")
    assert m.slept == pytest.approx(100 - 2 * CALL_LATENCY)
    assert m.elapsed == pytest.approx(100 + CALL_LATENCY)


def test_identical_call_sequences_are_deterministic(corpus):
    def run():
        conn = FixtureConnector(corpus, RateLimitPolicy(5, 60))
        out = [conn.search_by_name_location("Nemo Fish"), conn.resolve_url("http://sho.rt/a"),
               conn.fetch_recent_posts(corpus.get("source", "s1"))]
        return out, conn.requests, conn.clock.now
    assert run() == run()
