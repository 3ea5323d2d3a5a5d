"""Read-only network adapter served from a Corpus, with a simulated clock and rate limiter.

Every public call is charged against one shared :class:`RateLimiter` and
advances the :class:`Clock` by a fixed simulated latency, so search times and
rate-limit sleeps are reproducible and take no wall time.
"""

from __future__ import annotations

import contextlib
import contextvars
import math
import threading
from dataclasses import dataclass, field
from typing import Iterator

from .corpus import Corpus, canonical_url, url_domain
from .model import Identity, Post, normalize_username
from .similarity import name_match

CALL_LATENCY = 0.2
HOP_LATENCY = 1.0
PAGE_SCAN_LATENCY = 2.0
MAX_REDIRECTS = 5
PAGE_SIZE = 100

DEFAULT_NAME_CAP = 60
DEFAULT_POST_CAP = 50
DEFAULT_RECENT_POSTS = 100

NETWORK_KINDS = ("follower", "followee", "friend")

# hosts treated as social networks rather than web pages to scan
KNOWN_NETWORK_DOMAINS = {
    "instagram.com": "Instagram",
    "instagr.am": "Instagram",
    "youtube.com": "Youtube",
    "youtu.be": "Youtube",
    "foursquare.com": "Foursquare",
    "4sq.com": "Foursquare",
    "tumblr.com": "Tumblr",
    "yfrog.com": "Yfrog",
    "flickr.com": "Flickr",
}


class ConnectorError(Exception):
    pass


class NotFound(ConnectorError):
    def __init__(self, network: str, user_id: str):
        super().__init__(f"no identity {user_id!r} on network {network!r}")
        self.network = network
        self.user_id = user_id


class ResolutionFailed(ConnectorError):
    def __init__(self, url: str, reason: str, final_url: str | None = None):
        super().__init__(f"could not resolve {url}: {reason}")
        self.url = url
        self.reason = reason
        self.final_url = final_url


class Clock:
    """Monotone simulated clock in seconds."""

    def __init__(self, start: float = 0.0):
        self._now = float(start)
        self._lock = threading.Lock()

    @property
    def now(self) -> float:
        return self._now

    def advance(self, seconds: float) -> None:
        if seconds < 0:
            raise ValueError("clock cannot run backwards")
        with self._lock:
            self._now += seconds

    def advance_to(self, t: float) -> None:
        with self._lock:
            self._now = max(self._now, float(t))


@dataclass(frozen=True)
class RateLimitPolicy:
    max_requests: int = 350
    window: float = 3600.0

    def __post_init__(self):
        if self.max_requests < 1:
            raise ValueError("max_requests must be at least 1")
        if self.window <= 0:
            raise ValueError("window must be positive")

    @classmethod
    def parse(cls, text: str) -> "RateLimitPolicy":
        """Parse ``"R/W"``, R requests per W seconds."""
        try:
            req, win = text.split("/")
            return cls(int(req), float(win))
        except ValueError as exc:
            raise ValueError(f"bad rate limit {text!r}, expected R/W e.g. 350/3600") from exc


class RateLimiter:
    """Token bucket refilled at fixed window boundaries (multiples of ``window``).

    A request arriving with the bucket empty sleeps, on the simulated clock,
    until the next boundary.
    """

    def __init__(self, policy: RateLimitPolicy, clock: Clock):
        self.policy = policy
        self.clock = clock
        self.sleeps = 0
        self.slept = 0.0
        self._lock = threading.Lock()
        self._window_idx = self._index(clock.now)
        self._used = 0

    def _index(self, t: float) -> int:
        return math.floor(t / self.policy.window)

    def _roll(self) -> None:
        idx = self._index(self.clock.now)
        if idx != self._window_idx:
            self._window_idx = idx
            self._used = 0

    @property
    def remaining(self) -> int:
        with self._lock:
            self._roll()
            return self.policy.max_requests - self._used

    def acquire(self, cost: int = 1) -> float:
        """Take ``cost`` tokens, sleeping as needed; return simulated seconds slept."""
        slept = 0.0
        with self._lock:
            for _ in range(cost):
                self._roll()
                if self._used >= self.policy.max_requests:
                    boundary = (self._window_idx + 1) * self.policy.window
                    slept += boundary - self.clock.now
                    self.clock.advance_to(boundary)
                    self.sleeps += 1
                    self._roll()
                self._used += 1
            self.slept += slept
        return slept


@dataclass
class Meter:
    requests: int = 0
    elapsed: float = 0.0
    slept: float = 0.0


_active_meters: contextvars.ContextVar[tuple[Meter, ...]] = contextvars.ContextVar("_active_meters", default=())


@dataclass(frozen=True)
class ResolvedTarget:
    final_url: str
    target_identity: Identity | None = None
    via_page_scan: bool = False


@dataclass
class FixtureConnector:
    """Connector over an in-memory :class:`Corpus`.

    Construct one per independent session; it owns its clock and limiter.
    """

    corpus: Corpus
    policy: RateLimitPolicy = field(default_factory=RateLimitPolicy)
    clock: Clock = field(default_factory=Clock)

    def __post_init__(self):
        self.limiter = RateLimiter(self.policy, self.clock)
        self.requests = 0
        self._count_lock = threading.Lock()

    @property
    def source(self) -> str:
        return self.corpus.source

    @property
    def target(self) -> str:
        return self.corpus.target

    # -- accounting ------------------------------------------------------

    def _charge(self, latency: float, cost: int = 1) -> None:
        slept = self.limiter.acquire(cost)
        self.clock.advance(latency)
        with self._count_lock:
            self.requests += cost
        for meter in _active_meters.get():
            meter.requests += cost
            meter.elapsed += latency + slept
            meter.slept += slept

    @contextlib.contextmanager
    def metered(self) -> Iterator[Meter]:
        """Attribute requests and simulated time issued inside the block to a Meter."""
        meter = Meter()
        token = _active_meters.set(_active_meters.get() + (meter,))
        try:
            yield meter
        finally:
            _active_meters.reset(token)

    def _require(self, network: str, user_id: str) -> Identity:
        ident = self.corpus.get(network, user_id)
        if ident is None:
            raise NotFound(network, user_id)
        return ident

    # -- profile ---------------------------------------------------------

    def lookup_identity(self, network: str, user_id: str) -> Identity:
        self._charge(CALL_LATENCY)
        return self._require(network, user_id)

    def search_by_username(self, username: str) -> Identity | None:
        self._charge(CALL_LATENCY)
        hit = self.corpus.by_username(self.target, normalize_username(username))
        if hit is None or not hit.searchable:
            return None
        return hit

    def search_by_name_location(
        self, name: str, location: str | None = None, cap: int = DEFAULT_NAME_CAP
    ) -> list[Identity]:
        if cap < 1:
            raise ValueError("cap must be at least 1")
        self._charge(CALL_LATENCY)
        tokens = name.lower().split()
        pool = self.corpus.name_token_holders(self.target, tokens)
        loc = location.lower() if location else None
        hits = []
        for uid in sorted(pool):
            ident = self.corpus.get(self.target, uid)
            if not ident.searchable or not name_match(name, ident.display_name):
                continue
            if loc is not None and (ident.location is None or loc not in ident.location.lower()):
                continue
            hits.append(ident)
            if len(hits) == cap:
                break
        return hits

    def image(self, key: str | None):
        """Decoded profile raster for an image key (bundled with the profile record, no charge)."""
        return self.corpus.image(key)

    # -- content ---------------------------------------------------------

    def search_posts_by_text(self, text: str, cap: int = DEFAULT_POST_CAP) -> list[tuple[Identity, Post]]:
        self._charge(CALL_LATENCY)
        if not text.strip():
            return []
        out = []
        for post in self.corpus.posts_containing(self.target, text):
            author = self.corpus.get(post.network, post.author)
            if not author.posts_public:
                continue
            out.append((author, post))
            if len(out) == cap:
                break
        return out

    def fetch_recent_posts(self, ident: Identity, n: int = DEFAULT_RECENT_POSTS) -> list[Post]:
        if n < 1:
            raise ValueError("n must be at least 1")
        self._charge(CALL_LATENCY)
        self._require(ident.network, ident.user_id)
        return list(self.corpus.posts_of(ident.network, ident.user_id)[:n])

    # -- network ---------------------------------------------------------

    def fetch_network(self, ident: Identity, kind: str) -> list[Identity]:
        """Follower, followee or friend (mutual) members of a source identity.

        Costs one request per page of 100 members (at least one).
        """
        if kind not in NETWORK_KINDS:
            raise ValueError(f"unknown network kind {kind!r}")
        self._require(ident.network, ident.user_id)
        followers = self.corpus.followers(ident.user_id)
        followees = self.corpus.followees(ident.user_id)
        if kind == "follower":
            ids = followers
        elif kind == "followee":
            ids = followees
        else:
            ids = followers & followees
        members = [self.corpus.get(ident.network, uid) for uid in sorted(ids)]
        members = [m for m in members if m is not None]
        for _ in range(max(1, math.ceil(len(members) / PAGE_SIZE))):
            self._charge(CALL_LATENCY)
        return members

    def fetch_friend_list(self, ident: Identity) -> list[Identity] | None:
        self._charge(CALL_LATENCY)
        ident = self._require(ident.network, ident.user_id)
        if ident.entity_class != "person" or not ident.friendlist_public:
            return None
        friends = (self.corpus.get(ident.network, uid) for uid in sorted(self.corpus.friends(ident.user_id)))
        return [f for f in friends if f is not None]

    # -- web -------------------------------------------------------------

    def resolve_url(self, url: str) -> ResolvedTarget:
        """Follow redirects, then identify a target-network profile directly or by scanning the landing page.

        Fetching the URL and each redirect hop costs a request at HOP_LATENCY;
        scanning the landing page's links costs one more at PAGE_SCAN_LATENCY.
        """
        current = canonical_url(url)
        seen = {current}
        self._charge(HOP_LATENCY)
        hops = 0
        while True:
            page = self.corpus.page(current)
            if page is None or page.redirects_to is None:
                break
            hops += 1
            if hops > MAX_REDIRECTS:
                raise ResolutionFailed(url, "too many redirects", current)
            current = canonical_url(page.redirects_to)
            if current in seen:
                raise ResolutionFailed(url, "redirect loop", current)
            seen.add(current)
            self._charge(HOP_LATENCY)

        ident = self.corpus.profile_for_url(current)
        if ident is not None:
            return ResolvedTarget(current, ident, via_page_scan=False)
        domain = url_domain(current)
        if domain in self.corpus.domains.values() or known_network(domain):
            return ResolvedTarget(current)
        page = self.corpus.page(current)
        if page is None:
            raise ResolutionFailed(url, "unknown page", current)
        self._charge(PAGE_SCAN_LATENCY)
        for link in page.links:
            ident = self.corpus.profile_for_url(link)
            if ident is not None:
                return ResolvedTarget(current, ident, via_page_scan=True)
        return ResolvedTarget(current)


def known_network(domain: str) -> str | None:
    """Display name of the social network a host belongs to, if any."""
    for suffix, name in KNOWN_NETWORK_DOMAINS.items():
        if domain == suffix or domain.endswith("." + suffix):
            return name
    return None
