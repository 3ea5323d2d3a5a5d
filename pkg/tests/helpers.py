"""Small hand-built corpora for unit tests."""

import numpy as np

from idsearch.corpus import SOURCE, TARGET, Corpus, Edge, GroundTruthPair, Page, image_key
from idsearch.model import Identity, Post


def src(uid, username, name, **kw):
    return Identity(SOURCE, uid, username, name, **kw)


def tgt(uid, username, name, **kw):
    return Identity(TARGET, uid, username, name, **kw)


def solid(rgb, shape=(4, 4)):
    raster = np.empty((*shape, 3), dtype=np.uint8)
    raster[:] = rgb
    return raster


def build(identities, posts=(), follows=(), friends=(), pages=(), images=None, truth=()):
    """Corpus from plain tuples: follows (a, b) means a follows b; friends are target pairs."""
    edges = [Edge(SOURCE, a, b, "follow") for a, b in follows]
    edges += [Edge(TARGET, a, b, "friend") for a, b in friends]
    page_objs = [p if isinstance(p, Page) else Page(*p) for p in pages]
    post_objs = [p if isinstance(p, Post) else Post(*p) for p in posts]
    truth_objs = [GroundTruthPair(row[0], row[1], frozenset(row[2] if len(row) > 2 else ())) for row in truth]
    return Corpus(list(identities), post_objs, edges, page_objs, dict(images or {}), truth_objs, {})


def keyed(*rasters):
    """Map image keys to rasters, returning (images dict, keys)."""
    images = {image_key(r): r for r in rasters}
    return images, [image_key(r) for r in rasters]
