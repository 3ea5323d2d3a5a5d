"""Synthetic two-network corpora with ground-truth pairs and planted identity leaks.

Every paired user gets a source identity (the one we search from) and a target
identity (the one to find). Leak channels are planted independently per pair
and recorded as ground-truth labels; decoy identities share names, usernames
and content with paired users so candidate sets carry realistic noise.
All planted links are truthful: they point at the real counterpart.
"""

from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .corpus import (
    DEFAULT_DOMAINS,
    FOLLOW,
    FRIEND,
    SOURCE,
    TARGET,
    Corpus,
    Edge,
    GroundTruthPair,
    Page,
    canonical_url,
    image_key,
    searchable_text,
)
from .model import Identity, Post, normalize_username
from .similarity import jaro, name_match

# leak labels
SELF_ID_DIRECT = "self_id_direct"
SELF_ID_INDIRECT = "self_id_indirect"
SAME_USERNAME = "same_username"
SIMILAR_USERNAME = "similar_username"
NAME_LOCATION = "name_location"
IMAGE_REUSE = "image_reuse"
CROSS_POST = "cross_post"
SELF_MENTION = "self_mention"
NETWORK_LEAK = "network_leak"
LABELS = (
    SELF_ID_DIRECT,
    SELF_ID_INDIRECT,
    SAME_USERNAME,
    SIMILAR_USERNAME,
    NAME_LOCATION,
    IMAGE_REUSE,
    CROSS_POST,
    SELF_MENTION,
    NETWORK_LEAK,
)
URL_LABELS = frozenset({SELF_ID_DIRECT, SELF_ID_INDIRECT})


FIRST_NAMES = (
    "aaron", "abigail", "adrian", "alice", "amara", "andre", "anita", "arjun", "beatrice", "bruno",
    "camila", "carlos", "chloe", "damian", "daria", "deepak", "elena", "elliot", "emeka", "farah",
    "felix", "fiona", "gabriel", "grace", "hamid", "hannah", "hugo", "imani", "isaac", "ivana",
    "jamal", "janet", "jasper", "joaquin", "julia", "kavya", "keiko", "kieran", "laila", "lorenzo",
    "lucia", "magnus", "maya", "mihai", "nadia", "nikhil", "noor", "oliver", "olga", "omar",
    "pablo", "petra", "priya", "quentin", "rafael", "renata", "rohan", "rosa", "samir", "sanjay",
    "selma", "sofia", "tariq", "tessa", "tobias", "uma", "valeria", "victor", "wanda", "xavier",
    "yara", "yusuf", "zara", "zoltan", "ingrid", "lakshmi", "marco", "nora", "pedro", "stella",
)
LAST_NAMES = (
    "abbott", "achebe", "banerjee", "barros", "castillo", "chandra", "dahl", "delacroix", "eriksen", "esposito",
    "fischer", "fonseca", "gallagher", "ghosh", "haddad", "horvath", "iyer", "jansen", "kapoor", "kowalski",
    "larsen", "lindqvist", "mahoney", "mendoza", "nakamura", "novak", "okafor", "oliveira", "petrov", "quinn",
    "ramirez", "rossi", "sato", "schmidt", "tanaka", "thorne", "ueda", "vasquez", "wagner", "whitfield",
    "xu", "yamamoto", "zielinski", "agarwal", "brennan", "carvalho", "dimitrov", "edwards", "farouk", "gupta",
    "hendricks", "ibrahim", "jovanovic", "kimura", "lombardi", "moreau", "nguyen", "obrien", "pereira", "reddy",
    "sorensen", "takahashi", "underwood", "valdez", "weber", "yilmaz", "zhou", "bhatt", "cohen", "duarte",
    "eklund", "fontaine", "grant", "hussain", "ito", "kaur", "lund", "mishra", "park", "silva",
)
CITIES = (
    "Amsterdam", "Bangalore", "Berlin", "Bogota", "Boston", "Cairo", "Chennai", "Chicago", "Dublin", "Geneva",
    "Hyderabad", "Istanbul", "Jakarta", "Kolkata", "Lagos", "Lisbon", "London", "Madrid", "Manila", "Melbourne",
    "Mumbai", "Nairobi", "Oslo", "Paris", "Pune", "Seattle", "Seoul", "Stockholm", "Toronto", "Warsaw",
)
COUNTRY_SUFFIX = ("", ", IN", ", US", ", UK", ", EU")
WORDS = (
    "morning", "coffee", "train", "late", "again", "weekend", "finally", "project", "meeting", "rain",
    "sunny", "great", "match", "tonight", "dinner", "friends", "family", "happy", "birthday", "new",
    "phone", "music", "album", "concert", "reading", "book", "chapter", "exam", "results", "office",
    "holiday", "beach", "mountain", "road", "trip", "photos", "video", "watching", "movie", "series",
    "season", "finale", "cricket", "football", "score", "team", "win", "lost", "traffic", "bus",
    "market", "prices", "election", "news", "article", "blog", "post", "update", "launch", "startup",
    "code", "bug", "deploy", "server", "weekend", "garden", "flowers", "cat", "dog", "walk",
    "park", "lunch", "pizza", "recipe", "cooking", "baking", "bread", "tea", "chai", "sleep",
    "tired", "busy", "week", "monday", "friday", "gym", "run", "marathon", "training", "yoga",
    "festival", "lights", "street", "food", "shopping", "gift", "surprise", "wedding", "party", "dance",
    "thinking", "about", "really", "need", "some", "time", "off", "just", "saw", "best",
)
FLAIR = ("café", "naïve", "über", "\U0001F642", "❤", "¡vamos!", "résumé")
QUOTES = (
    "Be the change that you wish to see in the world.",
    "In the middle of every difficulty lies opportunity.",
    "The only way to do great work is to love what you do.",
    "Life is what happens when you are busy making other plans.",
    "It always seems impossible until it is done.",
    "Happiness depends upon ourselves.",
    "Whatever you are, be a good one.",
    "Turn your wounds into wisdom.",
    "Dream big and dare to fail.",
    "Stay hungry, stay foolish.",
)
BRANDS = (
    "Cola", "Motors", "Airlines", "Records", "Studios", "Football Club", "Gazette", "Pictures", "Telecom", "Bank",
)
SOURCE_APPS = ("web", "Twitter for iPhone", "Twitter for Android", "TweetDeck", "Twitterfeed", "Facebook")
SHORTENER = "sho.rt"

# social networks outside the two modelled ones, as linked from posts
SOCIAL_LINKS = {
    "Instagram": "https://instagram.com/p/{code}",
    "Youtube": "https://www.youtube.com/watch?v={code}",
    "Foursquare": "https://foursquare.com/v/{code}",
    "Tumblr": "https://{user}.tumblr.com/post/{num}",
    "Yfrog": "http://yfrog.com/{code}",
}
REFERENCE_DOMAIN_MIX = {"Instagram": 0.366, "Youtube": 0.297, "Foursquare": 0.061, "Tumblr": 0.060, "Yfrog": 0.040}
REFERENCE_UNIONS = (137, 82, 144, 175, 200, 149, 205)

BASE_TS = 1_325_376_000
QUOTE_TWEET_P = 0.12
NOISE_LINK_P = 0.25
SIMILAR_JARO = (0.75, 0.95)


@dataclass
class CorpusConfig:
    n_users: int = 200
    p_self_id_direct: float = 0.0
    p_self_id_indirect: float = 0.0
    p_same_username: float = 0.0
    p_similar_username: float = 0.0
    p_name_location_findable: float = 0.0
    p_image_reuse: float = 0.0
    p_cross_post: float = 0.0
    p_self_mention: float = 0.0
    p_network_leak: float = 0.0
    p_friendlist_public: float = 0.3
    p_posts_public: float = 0.5
    p_searchable: float = 0.7
    n_quote_sharers: int = 20
    seed: int = 0
    p_profile_image: float = 0.95
    # plant round(p * n) users per channel instead of independent coin flips
    exact_counts: bool = False
    # union counts URL, SU, NL, URL+SU, URL+NL, SU+NL, URL+SU+NL to reproduce exactly
    profile_unions: tuple[int, ...] | None = None
    # network name -> fraction of paired users linking it from a post (planted exactly)
    domain_mix: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.n_users < 1:
            raise ValueError("n_users must be at least 1")
        if self.n_quote_sharers < 0:
            raise ValueError("n_quote_sharers must be non-negative")
        for f in fields(self):
            if f.name.startswith("p_"):
                p = getattr(self, f.name)
                if not 0.0 <= p <= 1.0:
                    raise ValueError(f"{f.name}={p} is not a probability")
        if self.p_self_id_direct + self.p_self_id_indirect > 1.0:
            raise ValueError("direct and indirect self-identification are exclusive; their sum exceeds 1")
        for name, p in self.domain_mix.items():
            if name not in SOCIAL_LINKS:
                raise ValueError(f"unknown network {name!r} in domain_mix")
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"domain_mix[{name}]={p} is not a probability")
        if self.profile_unions is not None:
            self.profile_unions = tuple(int(x) for x in self.profile_unions)
            regions = solve_profile_regions(self.profile_unions)
            if sum(regions.values()) > self.n_users:
                raise ValueError("profile_unions need more users than n_users")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["profile_unions"] is not None:
            d["profile_unions"] = list(d["profile_unions"])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CorpusConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


def solve_profile_regions(unions: tuple[int, ...]) -> dict[str, int]:
    """Exclusive Venn-region sizes for the URL/SU/NL sub-method union table.

    ``unions`` is (|URL|, |SU|, |NL|, |URL∪SU|, |URL∪NL|, |SU∪NL|, |URL∪SU∪NL|);
    inclusion-exclusion recovers the pairwise and triple intersections.
    """
    u, s, n, us, un, sn, usn = unions
    i_us, i_un, i_sn = u + s - us, u + n - un, s + n - sn
    triple = usn - (u + s + n - i_us - i_un - i_sn)
    regions = {
        "URL": u - i_us - i_un + triple,
        "SU": s - i_us - i_sn + triple,
        "NL": n - i_un - i_sn + triple,
        "URL+SU": i_us - triple,
        "URL+NL": i_un - triple,
        "SU+NL": i_sn - triple,
        "URL+SU+NL": triple,
    }
    bad = {k: v for k, v in regions.items() if v < 0}
    if bad:
        raise ValueError(f"inconsistent union table, negative regions {bad}")
    return regions


def preset(name: str, seed: int | None = None, n_users: int | None = None) -> CorpusConfig:
    """Named corpus configurations: paper, dense, sparse, image, zero."""
    presets = {
        "paper": dict(
            n_users=543,
            profile_unions=REFERENCE_UNIONS,
            p_self_id_direct=0.20,
            p_self_id_indirect=0.052,
            p_similar_username=0.35,
            p_image_reuse=0.6,
            p_cross_post=3 / 543,
            p_self_mention=31 / 543,
            p_network_leak=1 / 543,
            p_friendlist_public=0.25,
            p_posts_public=0.4,
            p_searchable=0.7,
            n_quote_sharers=20,
            exact_counts=True,
            domain_mix=dict(REFERENCE_DOMAIN_MIX),
            seed=5431,
        ),
        "dense": dict(
            n_users=300,
            p_self_id_direct=0.25,
            p_self_id_indirect=0.15,
            p_same_username=0.5,
            p_similar_username=0.4,
            p_name_location_findable=0.6,
            p_image_reuse=0.7,
            p_cross_post=0.3,
            p_self_mention=0.3,
            p_network_leak=0.2,
            p_friendlist_public=0.5,
            p_posts_public=0.6,
            p_searchable=0.8,
            n_quote_sharers=25,
            seed=7,
        ),
        "sparse": dict(
            n_users=300,
            p_self_id_direct=0.03,
            p_self_id_indirect=0.02,
            p_same_username=0.08,
            p_similar_username=0.2,
            p_name_location_findable=0.1,
            p_image_reuse=0.2,
            p_cross_post=0.02,
            p_self_mention=0.03,
            p_network_leak=0.02,
            p_friendlist_public=0.1,
            p_posts_public=0.3,
            p_searchable=0.5,
            n_quote_sharers=10,
            seed=11,
        ),
        "image": dict(
            n_users=300,
            p_self_id_direct=0.08,
            p_self_id_indirect=0.04,
            p_same_username=0.3,
            p_similar_username=0.4,
            p_name_location_findable=0.6,
            p_image_reuse=1.0,
            p_profile_image=1.0,
            p_cross_post=0.05,
            p_self_mention=0.2,
            p_network_leak=0.05,
            seed=3,
        ),
        "zero": dict(n_users=100, seed=1),
    }
    if name not in presets:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(presets)}")
    kw = presets[name]
    if seed is not None:
        kw["seed"] = seed
    if n_users is not None:
        kw["n_users"] = n_users
        if kw.get("profile_unions") is not None and n_users < sum(solve_profile_regions(kw["profile_unions"]).values()):
            kw["profile_unions"] = None
            kw.update(p_self_id_direct=0.20, p_self_id_indirect=0.052, p_same_username=0.151,
                      p_name_location_findable=0.265)
    return CorpusConfig(**kw)


# ---------------------------------------------------------------------------


@dataclass
class _Person:
    first: str
    last: str

    @property
    def display(self) -> str:
        return f"{self.first.capitalize()} {self.last.capitalize()}"


class _Builder:
    def __init__(self, config: CorpusConfig):
        self.cfg = config
        self.rng = random.Random(config.seed)
        self.identities: dict[tuple[str, str], Identity] = {}
        self.order: list[tuple[str, str]] = []
        self.handles: dict[str, set[str]] = {SOURCE: set(), TARGET: set()}
        self.ids: dict[str, set[str]] = {SOURCE: set(), TARGET: set()}
        self.posts: list[Post] = []
        self.edges: set[tuple[str, str, str, str]] = set()
        self.pages: dict[str, Page] = {}
        self.images: dict[str, np.ndarray] = {}
        self.codes: set[str] = set()

    # -- primitives --------------------------------------------------------

    def new_id(self, network: str) -> str:
        prefix = "s" if network == SOURCE else "t"
        while True:
            uid = f"{prefix}{self.rng.getrandbits(40):010x}"
            if uid not in self.ids[network]:
                self.ids[network].add(uid)
                return uid

    def code(self, n: int = 7) -> str:
        alphabet = "abcdefghijkmnopqrstuvwxyzABCDEFGHJKLMNPQRSTUVWXYZ23456789"
        while True:
            c = "".join(self.rng.choice(alphabet) for _ in range(n))
            if c not in self.codes:
                self.codes.add(c)
                return c

    def person(self, avoid: _Person | None = None) -> _Person:
        while True:
            p = _Person(self.rng.choice(FIRST_NAMES), self.rng.choice(LAST_NAMES))
            if avoid is None or not ({p.first, p.last} & {avoid.first, avoid.last}):
                return p

    def city(self, avoid: str | None = None) -> str:
        while True:
            c = self.rng.choice(CITIES)
            if avoid is None or avoid.lower() not in c.lower():
                return c

    def claim(self, network: str, raw: str) -> bool:
        h = normalize_username(raw)
        if not h or h in self.handles[network]:
            return False
        self.handles[network].add(h)
        return True

    def username_for(self, network: str, p: _Person, avoid: str | None = None) -> str:
        r = self.rng
        for attempt in range(200):
            style = r.randrange(6)
            if style == 0:
                raw = f"{p.first}{p.last}"
            elif style == 1:
                raw = f"{p.first}_{p.last}"
            elif style == 2:
                raw = f"{p.first[0]}{p.last}"
            elif style == 3:
                raw = f"{p.first.capitalize()}{p.last.capitalize()}"
            elif style == 4:
                raw = f"{p.last}{p.first[:3]}"
            else:
                raw = f"{p.first}.{p.last}"
            if attempt > 3 or r.random() < 0.4:
                raw += str(r.randrange(1, 1000))
            if avoid is not None and jaro(normalize_username(raw), normalize_username(avoid)) >= SIMILAR_JARO[0]:
                continue
            if self.claim(network, raw):
                return raw
        raise RuntimeError("could not allocate a unique username")

    def similar_username(self, base: str) -> str | None:
        r = self.rng
        norm = normalize_username(base)
        for _ in range(60):
            edits = r.randint(1, 2)
            cand = base
            for _ in range(edits):
                op = r.randrange(3)
                if op == 0:
                    cand = cand + str(r.randrange(10))
                elif op == 1 and "_" in cand:
                    cand = cand.replace("_", "", 1)
                elif op == 1:
                    pos = r.randrange(1, max(2, len(cand)))
                    cand = cand[:pos] + "_" + cand[pos:]
                else:
                    cand = cand + "_"
            score = jaro(norm, normalize_username(cand))
            if SIMILAR_JARO[0] <= score <= SIMILAR_JARO[1] and self.claim(TARGET, cand):
                return cand
        return None

    def random_image(self) -> str:
        r = self.rng
        raster = np.empty((8, 8, 3), dtype=np.uint8)
        a = [r.randrange(256) for _ in range(3)]
        b = [r.randrange(256) for _ in range(3)]
        split = r.randint(1, 8)
        raster[:, :split] = a
        raster[:, split:] = b
        key = image_key(raster)
        self.images[key] = raster
        return key

    def add(self, ident: Identity) -> Identity:
        self.identities[ident.key] = ident
        self.order.append(ident.key)
        return ident

    def sentence(self, lo: int = 8, hi: int = 16) -> str:
        r = self.rng
        words = [r.choice(WORDS) for _ in range(r.randint(lo, hi))]
        if r.random() < 0.15:
            words.insert(r.randrange(len(words) + 1), r.choice(FLAIR))
        text = " ".join(words)
        return text[0].upper() + text[1:] + r.choice((".", "!", "", "?"))

    def post(self, network: str, author: str, text: str, ts: int, app: str | None = None) -> None:
        self.posts.append(Post(author, network, text, ts, app or self.rng.choice(SOURCE_APPS)))

    def filler_ts(self) -> int:
        return BASE_TS + self.rng.randrange(10_000_000)

    def planted_ts(self) -> int:
        return BASE_TS + 10_000_000 + self.rng.randrange(5_000_000)

    def shorten(self, url: str) -> str:
        short = f"http://{SHORTENER}/{self.code(6)}"
        self.pages[short] = Page(short, redirects_to=url)
        return short

    def follow(self, a: str, b: str) -> None:
        if a != b:
            self.edges.add((SOURCE, a, b, FOLLOW))

    def befriend(self, a: str, b: str) -> None:
        if a != b:
            lo, hi = sorted((a, b))
            self.edges.add((TARGET, lo, hi, FRIEND))

    def profile_url(self, ident: Identity, suffix: str = "") -> str:
        host = DEFAULT_DOMAINS[ident.network]
        if self.rng.random() < 0.3:
            host = "www." + host
        return f"https://{host}/{ident.username}{suffix}"


def _choose(rng: random.Random, n: int, p: float, exact: bool, pool: list[int] | None = None) -> set[int]:
    pool = list(range(n)) if pool is None else pool
    if exact:
        return set(rng.sample(pool, min(len(pool), round(p * n))))
    return {i for i in pool if rng.random() < p}


def _assign_channels(cfg: CorpusConfig, rng: random.Random) -> tuple[list[set[str]], dict[str, int] | None]:
    n = cfg.n_users
    labels: list[set[str]] = [set() for _ in range(n)]
    regions = None
    p_url = cfg.p_self_id_direct + cfg.p_self_id_indirect
    direct_share = cfg.p_self_id_direct / p_url if p_url > 0 else 1.0

    if cfg.profile_unions is not None:
        regions = solve_profile_regions(cfg.profile_unions)
        order = list(range(n))
        rng.shuffle(order)
        pos = 0
        url_users = []
        for region, size in regions.items():
            for i in order[pos : pos + size]:
                parts = region.split("+")
                if "URL" in parts:
                    url_users.append(i)
                if "SU" in parts:
                    labels[i].add(SAME_USERNAME)
                if "NL" in parts:
                    labels[i].add(NAME_LOCATION)
            pos += size
        url_users.sort()
        n_direct = round(len(url_users) * direct_share)
        direct = set(rng.sample(url_users, n_direct))
        for i in url_users:
            labels[i].add(SELF_ID_DIRECT if i in direct else SELF_ID_INDIRECT)
    else:
        if cfg.exact_counts:
            direct = _choose(rng, n, cfg.p_self_id_direct, True)
            rest = [i for i in range(n) if i not in direct]
            indirect = _choose(rng, n, cfg.p_self_id_indirect, True, rest)
        else:
            direct, indirect = set(), set()
            for i in range(n):
                x = rng.random()
                if x < cfg.p_self_id_direct:
                    direct.add(i)
                elif x < p_url:
                    indirect.add(i)
        for i in direct:
            labels[i].add(SELF_ID_DIRECT)
        for i in indirect:
            labels[i].add(SELF_ID_INDIRECT)
        for i in _choose(rng, n, cfg.p_same_username, cfg.exact_counts):
            labels[i].add(SAME_USERNAME)
        for i in _choose(rng, n, cfg.p_name_location_findable, cfg.exact_counts):
            labels[i].add(NAME_LOCATION)

    not_su = [i for i in range(n) if SAME_USERNAME not in labels[i]]
    for i in _choose(rng, len(not_su), cfg.p_similar_username, cfg.exact_counts, list(range(len(not_su)))):
        labels[not_su[i]].add(SIMILAR_USERNAME)
    for label, p in (
        (IMAGE_REUSE, cfg.p_image_reuse),
        (CROSS_POST, cfg.p_cross_post),
        (SELF_MENTION, cfg.p_self_mention),
        (NETWORK_LEAK, cfg.p_network_leak),
    ):
        for i in _choose(rng, n, p, cfg.exact_counts):
            labels[i].add(label)
    return labels, regions


def generate(config: CorpusConfig, out: str | Path | None = None) -> Corpus:
    """Build a corpus for ``config``; also write it to ``out`` when given.

    Output is a pure function of the config (seed included).
    """
    cfg = config
    b = _Builder(cfg)
    r = b.rng
    n = cfg.n_users
    labels, regions = _assign_channels(cfg, r)

    # -- paired identities -------------------------------------------------
    src_people: list[_Person] = []
    sources: list[Identity] = []
    for i in range(n):
        p = b.person()
        src_people.append(p)
        img = b.random_image() if (IMAGE_REUSE in labels[i] or r.random() < cfg.p_profile_image) else None
        sources.append(
            b.add(
                Identity(
                    SOURCE,
                    b.new_id(SOURCE),
                    b.username_for(SOURCE, p),
                    p.display,
                    location=b.city(),
                    profile_image=img,
                    searchable=True,
                    posts_public=True,
                )
            )
        )

    # same-username handles are reserved before any other target name is drawn
    same: dict[int, str] = {}
    for i in range(n):
        if SAME_USERNAME in labels[i]:
            raw = sources[i].username
            raw = raw if r.random() < 0.6 else raw.upper() if r.random() < 0.5 else raw.lower()
            b.claim(TARGET, raw)
            same[i] = raw

    targets: list[Identity] = []
    for i in range(n):
        s, p, lab = sources[i], src_people[i], labels[i]
        username = same.get(i)
        if SIMILAR_USERNAME in lab:
            username = b.similar_username(s.username)
            if username is None:
                lab.discard(SIMILAR_USERNAME)
        if username is None:
            username = b.username_for(TARGET, b.person(), avoid=s.username)

        # name, location, searchability
        searchable = SAME_USERNAME in lab or NAME_LOCATION in lab or r.random() < cfg.p_searchable
        display, location = p.display, s.location
        if NAME_LOCATION in lab:
            if r.random() < 0.2:
                display = f"{p.first.capitalize()} {r.choice('ABCDEFGHJKLMNPRSTW')}. {p.last.capitalize()}"
            location = s.location + r.choice(COUNTRY_SUFFIX)
        else:
            ways = ["location"]
            if NETWORK_LEAK not in lab:
                ways.append("name")
            if SAME_USERNAME not in lab:
                ways.append("hidden")
            way = r.choice(ways)
            if way == "name":
                display = b.person(avoid=p).display
                location = b.city() if r.random() < 0.5 else s.location
            elif way == "location":
                location = b.city(avoid=s.location) if r.random() < 0.85 else None
            else:
                searchable = False
        img = s.profile_image if IMAGE_REUSE in lab else (b.random_image() if r.random() < cfg.p_profile_image else None)
        targets.append(
            b.add(
                Identity(
                    TARGET,
                    b.new_id(TARGET),
                    username,
                    display,
                    location=location,
                    profile_image=img,
                    searchable=searchable,
                    posts_public=CROSS_POST in lab or r.random() < cfg.p_posts_public,
                    friendlist_public=r.random() < cfg.p_friendlist_public,
                )
            )
        )

    # -- target decoys -----------------------------------------------------
    namesakes: set[str] = set()
    squatters: set[str] = set()
    generic: list[Identity] = []
    pages: list[Identity] = []
    n_target_decoys = 2 * n
    squat_pool = [i for i in range(n) if normalize_username(sources[i].username) not in b.handles[TARGET]]
    squat_from = set(r.sample(squat_pool, min(len(squat_pool), n // 10)))
    squat_queue = sorted(squat_from)
    for k in range(n_target_decoys):
        roll = r.random()
        if roll < 0.08:
            name = f"{r.choice(LAST_NAMES).capitalize()} {r.choice(BRANDS)}"
            uname = name.replace(" ", "")
            while not b.claim(TARGET, uname):
                uname = name.replace(" ", "") + str(r.randrange(100))
            ident = b.add(
                Identity(TARGET, b.new_id(TARGET), uname, name, location=b.city(),
                         profile_image=b.random_image(), searchable=True, posts_public=True,
                         friendlist_public=False, entity_class=r.choice(("page", "page", "community")))
            )
            pages.append(ident)
            continue
        if roll < 0.45:
            j = r.randrange(n)
            display = sources[j].display_name
            location = sources[j].location if r.random() < 0.6 else b.city()
            kind = "namesake"
        else:
            display, location, kind = b.person().display, b.city(), "generic"
        if kind == "generic" and squat_queue:
            j = squat_queue.pop()
            uname = sources[j].username
            b.claim(TARGET, uname)
            kind = "squatter"
        else:
            first, last = (t.lower() for t in display.split()[:2])
            uname = b.username_for(TARGET, _Person(first, last))
        ident = b.add(
            Identity(
                TARGET,
                b.new_id(TARGET),
                uname,
                display,
                location=location,
                profile_image=b.random_image() if r.random() < 0.9 else None,
                searchable=r.random() < cfg.p_searchable,
                posts_public=r.random() < cfg.p_posts_public,
                friendlist_public=r.random() < cfg.p_friendlist_public,
            )
        )
        if kind == "namesake":
            namesakes.add(ident.user_id)
        elif kind == "squatter":
            squatters.add(ident.user_id)
        else:
            generic.append(ident)

    # generic decoys split into quote sharers and self-mention noise so no decoy
    # can collect provenance from two algorithms by construction
    r.shuffle(generic)
    half = len(generic) // 2
    sharer_pool, mention_pool = generic[:half], generic[half:]
    decoy_people = [i for i in generic] + [b.identities[(TARGET, u)] for u in sorted(namesakes | squatters)]

    # -- source decoys -----------------------------------------------------
    source_decoys: list[Identity] = []
    celebs: list[Identity] = []
    mappable = [d for d in decoy_people if d.friendlist_public]
    for k in range(n):
        p = b.person()
        roll = r.random()
        url = None
        if roll < 0.1 and pages:
            url = b.profile_url(r.choice(pages))
        elif roll < 0.3 and mappable:
            url = b.profile_url(r.choice(mappable))
        ident = b.add(
            Identity(SOURCE, b.new_id(SOURCE), b.username_for(SOURCE, p), p.display, location=b.city(),
                     profile_image=b.random_image() if r.random() < 0.9 else None, url_field=url)
        )
        source_decoys.append(ident)
        if roll < 0.1 and pages:
            celebs.append(ident)

    # -- url fields of paired sources ---------------------------------------
    for i in range(n):
        s, t, lab = sources[i], targets[i], labels[i]
        url = None
        if SELF_ID_DIRECT in lab:
            url = b.profile_url(t)
            if r.random() < 0.2:
                url = b.shorten(url)
        elif SELF_ID_INDIRECT in lab:
            blog = f"http://{s.handle.replace('_', '-').replace('.', '-')}.blogs.example/"
            links = [f"https://instagram.com/{s.handle}", b.profile_url(t), "http://news.example.com/"]
            r.shuffle(links)
            b.pages[blog] = Page(blog, links=tuple(links))
            url = blog if r.random() < 0.8 else b.shorten(blog)
        else:
            roll = r.random()
            if roll < 0.25:
                home = f"http://{s.handle.replace('_', '-').replace('.', '-')}.homepage.example/"
                b.pages[home] = Page(home, links=(f"https://instagram.com/{s.handle}", "http://news.example.com/"))
                url = home
            elif roll < 0.4:
                url = f"http://{s.handle.replace('_', '-').replace('.', '-')}.gone.example/"
        sources[i] = b.identities[s.key] = Identity(**{**asdict(s), "url_field": url})

    # -- posts -------------------------------------------------------------
    quote_posters = [i for i in range(n) if r.random() < QUOTE_TWEET_P]
    for ident in [*sources, *source_decoys, *targets, *decoy_people, *pages]:
        heavy = ident.network == SOURCE and r.random() < 0.03
        count = r.randint(105, 130) if heavy else r.randint(0 if ident.network == TARGET else 2, 10)
        for _ in range(count):
            b.post(ident.network, ident.user_id, b.sentence(), b.filler_ts())

    used_quotes: set[int] = set()
    for i in quote_posters:
        qi = r.randrange(len(QUOTES))
        used_quotes.add(qi)
        b.post(SOURCE, sources[i].user_id, QUOTES[qi], b.planted_ts())
    for qi in sorted(used_quotes):
        sharers = r.sample(sharer_pool, min(len(sharer_pool), cfg.n_quote_sharers))
        for d in sharers:
            if not d.posts_public:
                b.identities[d.key] = Identity(**{**asdict(d), "posts_public": True})
            b.post(TARGET, d.user_id, QUOTES[qi], b.filler_ts(), "Facebook")

    mention_people = [d for d in mention_pool if d.entity_class == "person"]
    for i in range(n):
        s, t, lab = sources[i], targets[i], labels[i]
        if CROSS_POST in lab:
            for _ in range(r.randint(1, 2)):
                text = b.sentence(12, 22) if r.random() < 0.5 else b.sentence(6, 10)
                ts = b.planted_ts()
                b.post(SOURCE, s.user_id, text, ts, r.choice(("Facebook", "Twitterfeed")))
                b.post(TARGET, t.user_id, text, ts + r.randrange(1, 120), r.choice(("Twitter", "Twitterfeed")))
        if SELF_MENTION in lab:
            for k in range(r.randint(2, 3)):
                url = b.profile_url(t, r.choice(("", f"/photos/{b.code(5)}", f"/posts/{r.randrange(10**6)}")))
                if r.random() < 0.4:
                    url = b.shorten(url)
                b.post(SOURCE, s.user_id, f"{b.sentence(4, 8)} {url}", b.planted_ts())
            for d in r.sample(mention_people, min(len(mention_people), r.randint(0, 2))):
                b.post(SOURCE, s.user_id, f"{b.sentence(4, 8)} {b.profile_url(d, '/photos/' + b.code(5))}",
                       b.planted_ts())
        if r.random() < NOISE_LINK_P:
            if r.random() < 0.5:
                url = f"http://news.example.com/story/{b.code(8)}"
                b.pages[url] = Page(url, links=("http://news.example.com/",))
            else:
                url = f"http://blog.example.org/{b.code(8)}"
            b.post(SOURCE, s.user_id, f"{b.sentence(4, 8)} {url}", b.planted_ts())

    domain_counts: dict[str, int] = {}
    for name in sorted(cfg.domain_mix):
        chosen = sorted(r.sample(range(n), round(cfg.domain_mix[name] * n)))
        domain_counts[name] = len(chosen)
        for i in chosen:
            s = sources[i]
            url = SOCIAL_LINKS[name].format(code=b.code(9), user=s.handle.replace("_", "-").replace(".", "-"),
                                            num=r.randrange(10**9))
            if r.random() < 0.3:
                url = b.shorten(url)
            b.post(SOURCE, s.user_id, f"{b.sentence(3, 7)} {url}", b.planted_ts())

    # -- networks ----------------------------------------------------------
    source_pool = [s.user_id for s in sources] + [d.user_id for d in source_decoys]
    celeb_ids = [c.user_id for c in celebs]
    for i in range(n):
        x = sources[i].user_id
        followers = r.sample(source_pool, r.randint(2, 12))
        followees = r.sample(source_pool, r.randint(1, 8)) + r.sample(celeb_ids, min(len(celeb_ids), r.randint(0, 4)))
        for f in followers:
            b.follow(f, x)
            if r.random() < 0.3:
                b.follow(x, f)
        for f in followees:
            b.follow(x, f)

    target_people = [d for d in decoy_people]
    for d in target_people:
        for f in r.sample(target_people, r.randint(0, 6)):
            b.befriend(d.user_id, f.user_id)

    for i in range(n):
        if NETWORK_LEAK not in labels[i]:
            continue
        x, t = sources[i], targets[i]
        for _ in range(r.randint(2, 3)):
            bp = b.person()
            bt = b.add(Identity(TARGET, b.new_id(TARGET), b.username_for(TARGET, bp), bp.display,
                                location=b.city(), profile_image=b.random_image(),
                                searchable=r.random() < cfg.p_searchable, friendlist_public=True))
            bs = b.add(Identity(SOURCE, b.new_id(SOURCE), b.username_for(SOURCE, bp), bp.display,
                                location=bt.location, profile_image=bt.profile_image,
                                url_field=b.profile_url(bt)))
            b.post(SOURCE, bs.user_id, b.sentence(), b.filler_ts())
            b.befriend(bt.user_id, t.user_id)
            for f in r.sample(target_people, min(len(target_people), r.randint(0, 3))):
                b.befriend(bt.user_id, f.user_id)
            b.follow(bs.user_id, x.user_id)
            if r.random() < 0.5:
                b.follow(x.user_id, bs.user_id)

    # -- assemble ------------------------------------------------------------
    truth = [
        GroundTruthPair(sources[i].user_id, targets[i].user_id, frozenset(labels[i])) for i in range(n)
    ]
    planted = Counter(label for lab in labels for label in lab)
    manifest = {
        "config": cfg.to_dict(),
        "source": SOURCE,
        "target": TARGET,
        "domains": dict(DEFAULT_DOMAINS),
        "n_pairs": n,
        "planted": {label: planted.get(label, 0) for label in LABELS},
        "profile_regions": regions,
        "domain_counts": domain_counts,
    }
    identities = [b.identities[k] for k in b.order]
    posts = sorted(b.posts, key=lambda p: (p.network, p.author, p.timestamp, p.text))
    edges = [Edge(*e) for e in sorted(b.edges)]
    corpus = Corpus(
        identities=identities,
        posts=posts,
        edges=edges,
        pages=[b.pages[k] for k in sorted(b.pages)],
        images=b.images,
        groundtruth=truth,
        manifest=manifest,
    )
    if out is not None:
        corpus.write(out)
    return corpus


# ---------------------------------------------------------------------------
# audit: re-derive leak labels from raw corpus data


@dataclass
class AuditReport:
    checked: int
    mismatches: list[tuple[str, str, str]]  # (source_id, label, "missing" | "unexpected")

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def to_dict(self) -> dict:
        return {"checked": self.checked, "ok": self.ok,
                "mismatches": [list(m) for m in self.mismatches]}


def _walk(corpus: Corpus, url: str, limit: int = 5) -> str | None:
    url = canonical_url(url)
    seen = {url}
    for _ in range(limit + 1):
        page = corpus.page(url)
        if page is None or page.redirects_to is None:
            return url
        url = canonical_url(page.redirects_to)
        if url in seen:
            return None
        seen.add(url)
    return None


def _points_at(corpus: Corpus, url: str, ident: Identity) -> bool:
    from urllib.parse import urlsplit

    parts = urlsplit(canonical_url(url))
    host = (parts.hostname or "").lower().removeprefix("www.")
    seg = parts.path.strip("/").split("/")[0] if parts.path.strip("/") else ""
    return host == corpus.domains[ident.network] and normalize_username(seg) == ident.handle


def derive_labels(corpus: Corpus, pair: GroundTruthPair) -> set[str]:
    """Leak channels that actually expose ``pair``'s target, judged directly from raw records."""
    s = corpus.get(corpus.source, pair.source_id)
    t = corpus.get(corpus.target, pair.target_id)
    found: set[str] = set()

    if s.url_field:
        final = _walk(corpus, s.url_field)
        if final is not None:
            if _points_at(corpus, final, t):
                found.add(SELF_ID_DIRECT)
            else:
                page = corpus.page(final)
                if page is not None and page.redirects_to is None and any(_points_at(corpus, l, t) for l in page.links):
                    found.add(SELF_ID_INDIRECT)

    if s.handle == t.handle and t.searchable:
        found.add(SAME_USERNAME)
    elif s.handle != t.handle and SIMILAR_JARO[0] <= jaro(s.handle, t.handle) <= SIMILAR_JARO[1]:
        found.add(SIMILAR_USERNAME)

    def nl_hit(ident: Identity) -> bool:
        if not ident.searchable or not name_match(s.display_name, ident.display_name):
            return False
        return not s.location or (ident.location is not None and s.location.lower() in ident.location.lower())

    if nl_hit(t):
        ahead = sum(1 for i in corpus.network_identities(corpus.target) if i.user_id < t.user_id and nl_hit(i))
        if ahead < 60:
            found.add(NAME_LOCATION)

    if s.profile_image is not None and s.profile_image == t.profile_image:
        found.add(IMAGE_REUSE)

    recent = corpus.posts_of(corpus.source, s.user_id)[:100]
    if t.posts_public:
        t_texts = [searchable_text(p.text) for p in corpus.posts_of(corpus.target, t.user_id)]
        for p in recent:
            q = searchable_text(p.text[:75]).strip()
            if len(q) >= 5 and any(q in tt for tt in t_texts):
                found.add(CROSS_POST)
                break

    for p in recent:
        for url in p.urls:
            final = _walk(corpus, url)
            if final is not None and _points_at(corpus, final, t):
                found.add(SELF_MENTION)

    if name_match(s.display_name, t.display_name):
        members = corpus.followers(s.user_id) | corpus.followees(s.user_id)
        listing = set()
        for m in members:
            mi = corpus.get(corpus.source, m)
            if mi is None or not mi.url_field:
                continue
            final = _walk(corpus, mi.url_field)
            mapped = corpus.profile_for_url(final) if final else None
            if mapped is None and final and corpus.page(final) is not None:
                for link in corpus.page(final).links:
                    mapped = corpus.profile_for_url(link)
                    if mapped is not None:
                        break
            if mapped is not None and mapped.friendlist_public and t.user_id in corpus.friends(mapped.user_id):
                listing.add(mapped.user_id)
        if len(listing) >= 2:
            found.add(NETWORK_LEAK)
    return found


def audit(corpus: Corpus) -> AuditReport:
    """Compare recorded leak labels with labels re-derived from the corpus data."""
    mismatches = []
    for pair in corpus.groundtruth:
        derived = derive_labels(corpus, pair)
        for label in sorted(pair.leak_labels - derived):
            mismatches.append((pair.source_id, label, "missing"))
        for label in sorted(derived - pair.leak_labels):
            mismatches.append((pair.source_id, label, "unexpected"))
    return AuditReport(len(corpus.groundtruth), mismatches)


def write_config(config: CorpusConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n")


def read_config(path: str | Path) -> CorpusConfig:
    return CorpusConfig.from_dict(json.loads(Path(path).read_text()))
