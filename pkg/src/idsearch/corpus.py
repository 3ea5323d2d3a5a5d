"""In-memory corpus of two social networks plus ground truth, with JSON Lines persistence.

Layout of a corpus directory::

    identities.jsonl  posts.jsonl  edges.jsonl  pages.jsonl
    groundtruth.jsonl manifest.json images/<key>.png
"""

from __future__ import annotations

import hashlib
import io
import json
import re
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator
from urllib.parse import urlsplit

import numpy as np
from PIL import Image

from .model import Identity, Post, normalize_username

SOURCE = "source"
TARGET = "target"
DEFAULT_DOMAINS = {SOURCE: "source.net", TARGET: "target.net"}

FOLLOW = "follow"
FRIEND = "friend"

_NON_ASCII = re.compile(r"[^\x00-\x7f]")
_WORD = re.compile(r"[a-z0-9]+")


class CorpusError(Exception):
    """Malformed or incomplete corpus data."""


@dataclass(frozen=True)
class Page:
    url: str
    redirects_to: str | None = None
    links: tuple[str, ...] = ()


@dataclass(frozen=True)
class GroundTruthPair:
    source_id: str
    target_id: str
    leak_labels: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Edge:
    network: str
    src: str
    dst: str
    kind: str


def canonical_url(url: str) -> str:
    url = url.strip()
    if "://" not in url:
        url = "http://" + url
    return url


def url_domain(url: str) -> str:
    host = (urlsplit(canonical_url(url)).hostname or "").lower()
    return host[4:] if host.startswith("www.") else host


def url_first_segment(url: str) -> str:
    path = urlsplit(canonical_url(url)).path.strip("/")
    return path.split("/", 1)[0] if path else ""


def searchable_text(text: str) -> str:
    """Post text as the fixture search endpoint matches it: ASCII only, lowercase."""
    return _NON_ASCII.sub("", text).lower()


def image_key(raster: np.ndarray) -> str:
    raster = np.ascontiguousarray(raster, dtype=np.uint8)
    h = hashlib.sha256()
    h.update(repr(raster.shape).encode())
    h.update(raster.tobytes())
    return h.hexdigest()[:20]


@dataclass
class Corpus:
    identities: list[Identity]
    posts: list[Post] = field(default_factory=list)
    edges: list[Edge] = field(default_factory=list)
    pages: list[Page] = field(default_factory=list)
    images: dict[str, np.ndarray] = field(default_factory=dict)
    groundtruth: list[GroundTruthPair] = field(default_factory=list)
    manifest: dict = field(default_factory=dict)

    def __post_init__(self):
        self.domains = dict(DEFAULT_DOMAINS)
        self.domains.update(self.manifest.get("domains", {}))
        self._by_key: dict[tuple[str, str], Identity] = {}
        self._by_handle: dict[str, dict[str, Identity]] = defaultdict(dict)
        self._name_tokens: dict[str, dict[str, set[str]]] = defaultdict(lambda: defaultdict(set))
        for ident in self.identities:
            if ident.key in self._by_key:
                raise CorpusError(f"duplicate user_id {ident.user_id} on {ident.network}")
            self._by_key[ident.key] = ident
            handle = ident.handle
            if handle:
                if handle in self._by_handle[ident.network]:
                    raise CorpusError(f"duplicate username {handle!r} on {ident.network}")
                self._by_handle[ident.network][handle] = ident
            for tok in set(ident.display_name.lower().split()):
                self._name_tokens[ident.network][tok].add(ident.user_id)

        self._posts_by_author: dict[tuple[str, str], list[Post]] = defaultdict(list)
        for post in self.posts:
            if (post.network, post.author) not in self._by_key:
                raise CorpusError(f"post by unknown author {post.author} on {post.network}")
            self._posts_by_author[(post.network, post.author)].append(post)
        for plist in self._posts_by_author.values():
            plist.sort(key=lambda p: -p.timestamp)

        self._search_texts: dict[str, list[tuple[Post, str]]] = defaultdict(list)
        self._word_index: dict[str, dict[str, set[int]]] = defaultdict(lambda: defaultdict(set))
        for post in self.posts:
            bucket = self._search_texts[post.network]
            text = searchable_text(post.text)
            for word in set(_WORD.findall(text)):
                self._word_index[post.network][word].add(len(bucket))
            bucket.append((post, text))

        self._follow_out: dict[str, set[str]] = defaultdict(set)
        self._follow_in: dict[str, set[str]] = defaultdict(set)
        self._friends: dict[str, set[str]] = defaultdict(set)
        for e in self.edges:
            if e.kind == FOLLOW:
                self._follow_out[e.src].add(e.dst)
                self._follow_in[e.dst].add(e.src)
            elif e.kind == FRIEND:
                self._friends[e.src].add(e.dst)
                self._friends[e.dst].add(e.src)
            else:
                raise CorpusError(f"unknown edge kind {e.kind!r}")

        self._pages = {canonical_url(p.url): p for p in self.pages}
        self._truth = {p.source_id: p for p in self.groundtruth}

    # -- identity access -------------------------------------------------

    @property
    def source(self) -> str:
        return self.manifest.get("source", SOURCE)

    @property
    def target(self) -> str:
        return self.manifest.get("target", TARGET)

    def get(self, network: str, user_id: str) -> Identity | None:
        return self._by_key.get((network, user_id))

    def by_username(self, network: str, username: str) -> Identity | None:
        return self._by_handle.get(network, {}).get(normalize_username(username))

    def network_identities(self, network: str) -> Iterator[Identity]:
        return (i for i in self.identities if i.network == network)

    def name_token_holders(self, network: str, tokens: Iterable[str]) -> set[str]:
        index = self._name_tokens.get(network, {})
        out: set[str] = set()
        for tok in tokens:
            out |= index.get(tok, set())
        return out

    def image(self, key: str | None) -> np.ndarray | None:
        if key is None:
            return None
        return self.images.get(key)

    # -- content ---------------------------------------------------------

    def posts_of(self, network: str, user_id: str) -> list[Post]:
        """Posts by an author, newest first."""
        return self._posts_by_author.get((network, user_id), [])

    def posts_containing(self, network: str, query: str) -> list[Post]:
        """Posts whose searchable text contains ``query`` (case-insensitive).

        A word bounded on both sides inside the query is also a whole word of
        any matching post, so the inverted index narrows the scan.
        """
        query = query.lower()
        bucket = self._search_texts.get(network, [])
        inner = [m.group() for m in _WORD.finditer(query) if m.start() > 0 and m.end() < len(query)]
        if inner:
            index = self._word_index[network]
            rows = set.intersection(*(index.get(w, set()) for w in inner))
            scan = (bucket[i] for i in sorted(rows))
        else:
            scan = iter(bucket)
        return [post for post, text in scan if query in text]

    # -- graph -----------------------------------------------------------

    def followers(self, user_id: str) -> set[str]:
        return self._follow_in.get(user_id, set())

    def followees(self, user_id: str) -> set[str]:
        return self._follow_out.get(user_id, set())

    def friends(self, user_id: str) -> set[str]:
        return self._friends.get(user_id, set())

    # -- web -------------------------------------------------------------

    def page(self, url: str) -> Page | None:
        return self._pages.get(canonical_url(url))

    def profile_for_url(self, url: str) -> Identity | None:
        """Target-network identity a URL points at, judged by host and first path segment."""
        if url_domain(url) != self.domains[self.target]:
            return None
        seg = url_first_segment(url)
        return self.by_username(self.target, seg) if seg else None

    def profile_url(self, ident: Identity) -> str:
        return f"https://{self.domains[ident.network]}/{ident.username}"

    # -- ground truth ----------------------------------------------------

    def truth_for(self, source_id: str) -> GroundTruthPair | None:
        return self._truth.get(source_id)

    @property
    def corpus_id(self) -> str:
        if not hasattr(self, "_corpus_id"):
            h = hashlib.sha256()
            for name, blob in sorted(self._serialized().items()):
                h.update(name.encode())
                h.update(blob)
            self._corpus_id = h.hexdigest()[:16]
        return self._corpus_id

    # -- persistence -----------------------------------------------------

    def _serialized(self) -> dict[str, bytes]:
        files = {
            "identities.jsonl": _jsonl(identity_record(i) for i in self.identities),
            "posts.jsonl": _jsonl(post_record(p) for p in self.posts),
            "edges.jsonl": _jsonl(
                {"network": e.network, "from": e.src, "to": e.dst, "kind": e.kind} for e in self.edges
            ),
            "pages.jsonl": _jsonl(page_record(p) for p in self.pages),
            "groundtruth.jsonl": _jsonl(
                {"source_id": g.source_id, "target_id": g.target_id, "leak_labels": sorted(g.leak_labels)}
                for g in self.groundtruth
            ),
            "manifest.json": (json.dumps(self.manifest, indent=2, sort_keys=True) + "\n").encode(),
        }
        return files

    def write(self, out: str | Path) -> Path:
        out = Path(out)
        (out / "images").mkdir(parents=True, exist_ok=True)
        for name, blob in self._serialized().items():
            (out / name).write_bytes(blob)
        for key in sorted(self.images):
            buf = io.BytesIO()
            Image.fromarray(np.ascontiguousarray(self.images[key], dtype=np.uint8), "RGB").save(buf, format="PNG")
            (out / "images" / f"{key}.png").write_bytes(buf.getvalue())
        return out

    @classmethod
    def load(cls, path: str | Path) -> "Corpus":
        path = Path(path)
        if not (path / "identities.jsonl").is_file():
            raise CorpusError(f"{path} is not a corpus directory (identities.jsonl missing)")
        try:
            identities = [identity_from_record(r) for r in _read_jsonl(path / "identities.jsonl")]
            posts = [
                Post(r["author"], r["network"], r["text"], int(r["timestamp"]), r.get("source_app"))
                for r in _read_jsonl(path / "posts.jsonl")
            ]
            edges = [Edge(r["network"], r["from"], r["to"], r["kind"]) for r in _read_jsonl(path / "edges.jsonl")]
            pages = [
                Page(r["url"], r.get("redirects_to"), tuple(r.get("links", ())))
                for r in _read_jsonl(path / "pages.jsonl")
            ]
            truth = [
                GroundTruthPair(r["source_id"], r["target_id"], frozenset(r.get("leak_labels", ())))
                for r in _read_jsonl(path / "groundtruth.jsonl")
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise CorpusError(f"malformed corpus record in {path}: {exc}") from exc
        manifest = {}
        if (path / "manifest.json").is_file():
            manifest = json.loads((path / "manifest.json").read_text())
        images = {}
        img_dir = path / "images"
        if img_dir.is_dir():
            for f in sorted(img_dir.glob("*.png")):
                with Image.open(f) as im:
                    images[f.stem] = np.asarray(im.convert("RGB"))
        return cls(identities, posts, edges, pages, images, truth, manifest)


def identity_record(i: Identity) -> dict:
    return {
        "network": i.network,
        "user_id": i.user_id,
        "username": i.username,
        "display_name": i.display_name,
        "location": i.location,
        "image_key": i.profile_image,
        "url_field": i.url_field,
        "searchable": i.searchable,
        "posts_public": i.posts_public,
        "friendlist_public": i.friendlist_public,
        "entity_class": i.entity_class,
    }


def identity_from_record(r: dict) -> Identity:
    return Identity(
        network=r["network"],
        user_id=r["user_id"],
        username=r["username"],
        display_name=r["display_name"],
        location=r.get("location"),
        profile_image=r.get("image_key"),
        url_field=r.get("url_field"),
        searchable=bool(r.get("searchable", True)),
        posts_public=bool(r.get("posts_public", True)),
        friendlist_public=bool(r.get("friendlist_public", False)),
        entity_class=r.get("entity_class", "person"),
    )


def post_record(p: Post) -> dict:
    return {
        "author": p.author,
        "network": p.network,
        "text": p.text,
        "timestamp": p.timestamp,
        "source_app": p.source_app,
    }


def page_record(p: Page) -> dict:
    rec: dict = {"url": p.url}
    if p.redirects_to is not None:
        rec["redirects_to"] = p.redirects_to
    rec["links"] = list(p.links)
    return rec


def _jsonl(records: Iterable[dict]) -> bytes:
    return "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records).encode("utf-8")


def _read_jsonl(path: Path) -> list[dict]:
    if not path.is_file():
        return []
    with path.open(encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
