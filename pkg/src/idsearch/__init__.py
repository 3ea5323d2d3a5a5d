"""Offline cross-network identity search over fixture-backed social network corpora."""

from .connectors import Clock, FixtureConnector, RateLimitPolicy, RateLimiter
from .corpus import Corpus
from .model import ALGORITHMS, AlgorithmOutcome, Candidate, Identity, Post, SearchResult
from .orchestrator import OrchestrationPolicy, explain, find_nemo

__all__ = [
    "ALGORITHMS",
    "AlgorithmOutcome",
    "Candidate",
    "Clock",
    "Corpus",
    "FixtureConnector",
    "Identity",
    "OrchestrationPolicy",
    "Post",
    "RateLimitPolicy",
    "RateLimiter",
    "SearchResult",
    "explain",
    "find_nemo",
]
