"""Ranking metrics: Jaro string similarity, tf cosine over text, RGB histogram intersection."""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass

import numpy as np

BINS_PER_CHANNEL = 8
N_BINS = BINS_PER_CHANNEL**3
_SHIFT = 8 - int(math.log2(BINS_PER_CHANNEL))

# unicode letters/digits, underscore excluded
_TOKEN_RE = re.compile(r"[^\W_]+")

MIN_NAME_TOKEN = 3


def jaro(a: str, b: str) -> float:
    """Jaro similarity of two strings; 1.0 for two empty strings."""
    if a == b:
        return 1.0
    la, lb = len(a), len(b)
    if not la or not lb:
        return 0.0
    window = max(max(la, lb) // 2 - 1, 0)
    a_hit = [False] * la
    b_hit = [False] * lb
    matches = 0
    for i, ch in enumerate(a):
        for j in range(max(0, i - window), min(lb, i + window + 1)):
            if not b_hit[j] and b[j] == ch:
                a_hit[i] = b_hit[j] = True
                matches += 1
                break
    if not matches:
        return 0.0
    half_transpositions = 0
    k = 0
    for i in range(la):
        if not a_hit[i]:
            continue
        while not b_hit[k]:
            k += 1
        if a[i] != b[k]:
            half_transpositions += 1
        k += 1
    m = matches
    return (m / la + m / lb + (m - half_transpositions / 2) / m) / 3


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class TermVector:
    weights: dict[str, float]

    @classmethod
    def from_text(cls, text: str) -> "TermVector":
        return cls({tok: float(n) for tok, n in Counter(tokenize(text)).items()})

    def norm(self) -> float:
        return math.sqrt(sum(w * w for w in self.weights.values()))

    def dot(self, other: "TermVector") -> float:
        small, large = sorted((self.weights, other.weights), key=len)
        return sum(w * large.get(tok, 0.0) for tok, w in small.items())


def cosine_text(a: str, b: str) -> float:
    va, vb = TermVector.from_text(a), TermVector.from_text(b)
    if not va.weights or not vb.weights:
        return 0.0
    return min(1.0, va.dot(vb) / (va.norm() * vb.norm()))


@dataclass(frozen=True)
class Histogram:
    bins: np.ndarray
    total: float

    def normalized(self) -> "Histogram":
        return Histogram(self.bins / self.total, 1.0)


def as_rgb(image) -> np.ndarray | None:
    """Coerce an image (ndarray or PIL image) to an (N, 3) uint8 pixel array."""
    if image is None:
        return None
    if hasattr(image, "convert"):
        image = np.asarray(image.convert("RGB"))
    arr = np.asarray(image)
    if arr.ndim < 2 or arr.shape[-1] < 3 or arr.size == 0:
        return None
    return arr[..., :3].reshape(-1, 3).astype(np.uint8, copy=False)


def rgb_histogram(image) -> Histogram:
    px = as_rgb(image)
    if px is None:
        raise ValueError("image is not decodable to an RGB raster")
    q = (px >> _SHIFT).astype(np.int64)
    idx = (q[:, 0] * BINS_PER_CHANNEL + q[:, 1]) * BINS_PER_CHANNEL + q[:, 2]
    bins = np.bincount(idx, minlength=N_BINS).astype(np.float64)
    return Histogram(bins, float(bins.sum()))


def histogram_intersection(a: Histogram, b: Histogram) -> float:
    return float(np.minimum(a.normalized().bins, b.normalized().bins).sum())


def histogram_similarity(img_a, img_b) -> float:
    """Intersection of L1-normalised 8x8x8 RGB histograms; 0.0 if either image is missing."""
    if as_rgb(img_a) is None or as_rgb(img_b) is None:
        return 0.0
    return min(1.0, histogram_intersection(rgb_histogram(img_a), rgb_histogram(img_b)))


def name_match(queried_name: str, candidate_name: str) -> bool:
    """Whether a candidate's name equals the queried name or contains one of its tokens.

    Only queried tokens of at least three characters count, so initials do not
    match everyone.
    """
    q = queried_name.lower().split()
    c = candidate_name.lower().split()
    if q == c:
        return True
    cand_tokens = set(c)
    return any(len(tok) >= MIN_NAME_TOKEN and tok in cand_tokens for tok in q)
