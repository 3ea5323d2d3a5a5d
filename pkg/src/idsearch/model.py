"""Value types shared by the connectors, the search algorithms and the evaluator."""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping

PROFILE = "profile"
CONTENT = "content"
SELF_MENTION = "self_mention"
NETWORK = "network"
ALGORITHMS = (PROFILE, CONTENT, SELF_MENTION, NETWORK)

# profile sub-methods
URL, SU, NL = "URL", "SU", "NL"
SUB_METHODS = (URL, SU, NL)

ENTITY_CLASSES = ("person", "page", "community")

_URL_RE = re.compile(r"https?://[^\s<>\"']+")
_URL_TRAILING = ".,;:!?)]}'\""


def normalize_username(raw: str) -> str:
    """Lowercase, strip surrounding whitespace and any leading ``@`` sigils."""
    s = raw.lower()
    while True:
        t = s.strip().lstrip("@")
        if t == s:
            return s
        s = t


def extract_urls(text: str) -> tuple[str, ...]:
    return tuple(m.group(0).rstrip(_URL_TRAILING) for m in _URL_RE.finditer(text))


@dataclass(frozen=True)
class Identity:
    network: str
    user_id: str
    username: str
    display_name: str
    location: str | None = None
    profile_image: str | None = None
    url_field: str | None = None
    searchable: bool = True
    posts_public: bool = True
    friendlist_public: bool = False
    entity_class: str = "person"

    def __post_init__(self):
        if not self.network:
            raise ValueError("network label must be non-empty")
        if not self.user_id:
            raise ValueError("user_id must be non-empty")
        if self.entity_class not in ENTITY_CLASSES:
            raise ValueError(f"unknown entity_class {self.entity_class!r}")
        if self.entity_class == "person" and not normalize_username(self.username):
            raise ValueError(f"person {self.user_id} has an empty username")
        if self.entity_class != "person" and self.friendlist_public:
            raise ValueError(f"{self.entity_class} {self.user_id} cannot expose a friend list")

    @property
    def key(self) -> tuple[str, str]:
        return (self.network, self.user_id)

    @property
    def handle(self) -> str:
        return normalize_username(self.username)


@dataclass(frozen=True)
class Post:
    author: str
    network: str
    text: str
    timestamp: int
    source_app: str | None = None
    urls: tuple[str, ...] = field(init=False)

    def __post_init__(self):
        if self.timestamp < 0:
            raise ValueError("timestamp must be non-negative")
        object.__setattr__(self, "urls", extract_urls(self.text))


@dataclass(frozen=True)
class Candidate:
    """A target-network identity proposed for the queried user."""

    identity: Identity
    scores: Mapping[str, float]
    provenance: frozenset[str]
    tags: frozenset[str] = frozenset()
    rank: int | None = None
    mention_count: int = 0
    no_image: bool = False

    def __post_init__(self):
        if not self.provenance:
            raise ValueError("candidate provenance must be non-empty")
        for name, score in self.scores.items():
            if name not in self.provenance:
                raise ValueError(f"score for {name!r} without matching provenance")
            if not 0.0 <= score <= 1.0:
                raise ValueError(f"score {score} for {name!r} outside [0, 1]")
        if self.mention_count < 0:
            raise ValueError("mention_count must be non-negative")

    @property
    def key(self) -> tuple[str, str]:
        return self.identity.key

    @property
    def user_id(self) -> str:
        return self.identity.user_id


@dataclass(frozen=True)
class AlgorithmOutcome:
    algorithm: str
    candidates: tuple[Candidate, ...] = ()
    confirmed: Identity | None = None
    requests_used: int = 0
    elapsed: float = 0.0
    # candidate user_ids before ranking (profile search only)
    non_ranked: tuple[str, ...] = ()
    error: str | None = None

    def __post_init__(self):
        if self.confirmed is not None and self.confirmed.key not in {c.key for c in self.candidates}:
            raise ValueError("confirmed identity must appear among the candidates")

    def rank_of(self, key: tuple[str, str]) -> int | None:
        for pos, cand in enumerate(self.candidates, start=1):
            if cand.key == key:
                return pos
        return None


@dataclass(frozen=True)
class SearchResult:
    query: Identity
    outcomes: Mapping[str, AlgorithmOutcome]
    merged_candidates: tuple[Candidate, ...]
    confirmed: Identity | None = None
    rule: str | None = None
    confirmed_stage: str | None = None
    total_elapsed: float = 0.0
    errors: Mapping[str, str] = field(default_factory=dict)

    @property
    def requests_used(self) -> int:
        return sum(o.requests_used for o in self.outcomes.values())

    def rank_of(self, key: tuple[str, str]) -> int | None:
        for pos, cand in enumerate(self.merged_candidates, start=1):
            if cand.key == key:
                return pos
        return None


def dedupe_candidates(cands: Iterable[Candidate]) -> list[Candidate]:
    """Collapse candidates sharing (network, user_id), keeping first-seen order.

    Provenance and tags are unioned, score maps merged (max on clashes) and
    mention counts summed.
    """
    merged: dict[tuple[str, str], Candidate] = {}
    for cand in cands:
        prev = merged.get(cand.key)
        if prev is None:
            merged[cand.key] = cand
            continue
        scores = dict(prev.scores)
        for name, score in cand.scores.items():
            scores[name] = max(score, scores.get(name, 0.0))
        merged[cand.key] = replace(
            prev,
            scores=scores,
            provenance=prev.provenance | cand.provenance,
            tags=prev.tags | cand.tags,
            mention_count=prev.mention_count + cand.mention_count,
            no_image=prev.no_image and cand.no_image,
        )
    return list(merged.values())


def rank_by_score(cands: Iterable[Candidate], score: Callable[[Candidate], float]) -> list[Candidate]:
    """Sort by descending score, ties by ascending user_id, and stamp 1-based ranks."""
    ordered = sorted(cands, key=lambda c: (-score(c), c.user_id))
    return assign_ranks(ordered)


def assign_ranks(cands: Iterable[Candidate]) -> list[Candidate]:
    return [replace(c, rank=i) for i, c in enumerate(cands, start=1)]
