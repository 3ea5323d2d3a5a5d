"""Batch evaluation over every ground-truth pair: accuracy, candidate-set size, search time, ranks.

Each query runs against its own connector (fresh clock and rate limiter) over
the shared read-only corpus, so per-query figures do not depend on how many
queries ran before it or on how they were scheduled across threads.
"""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

from .algorithms import SEARCHES, profile_search
from .connectors import MAX_REDIRECTS, FixtureConnector, RateLimitPolicy, known_network
from .corpus import Corpus, CorpusError, canonical_url, url_domain
from .model import ALGORITHMS, PROFILE, SUB_METHODS, AlgorithmOutcome, Identity
from .orchestrator import OrchestrationPolicy, find_nemo

INTEGRATED = "integrated"
ELAPSED_EDGES = (1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 3600)
ABSENT = "absent"


def rank_of_correct(outcome: AlgorithmOutcome, truth: Identity | tuple[str, str]) -> int | None:
    """1-based position of the true identity among ranked candidates, or None when missing."""
    key = truth.key if isinstance(truth, Identity) else truth
    return outcome.rank_of(key)


def _elapsed_bin(t: float) -> str:
    lo = 0
    for edge in ELAPSED_EDGES:
        if t < edge:
            return f"{lo}-{edge}"
        lo = edge
    return f">={ELAPSED_EDGES[-1]}"


def _hist(values) -> dict[str, int]:
    counts = Counter(values)

    def order(k):
        return (1, 0, "") if k == ABSENT else (0, float(k.split("-")[0].lstrip(">=")), k)

    return {k: counts[k] for k in sorted(counts, key=order)}


def _q(x: float) -> float:
    # simulated times are sums of decimal latencies; fix the representation
    return round(x, 6)


@dataclass
class QueryRecord:
    source_id: str
    target_id: str
    runs: dict[str, dict] = field(default_factory=dict)
    sub_methods: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "source_id": self.source_id,
            "target_id": self.target_id,
            "sub_methods": list(self.sub_methods),
            "runs": self.runs,
        }


def _summary(out_key: tuple[str, str], candidates, confirmed, requests, elapsed, rank) -> dict:
    return {
        "identified": any(c.key == out_key for c in candidates),
        "rank": rank,
        "candidates": len(candidates),
        "confirmed": confirmed.user_id if confirmed is not None else None,
        "requests": requests,
        "elapsed": _q(elapsed),
    }


def _evaluate_query(
    corpus: Corpus, source_id: str, target_id: str, which: tuple[str, ...], policy, rate: RateLimitPolicy
) -> QueryRecord:
    truth_key = (corpus.target, target_id)
    rec = QueryRecord(source_id, target_id)

    def fresh() -> FixtureConnector:
        return FixtureConnector(corpus, rate)

    for name in which:
        if name == INTEGRATED:
            res = find_nemo(fresh(), source_id, policy)
            s = _summary(truth_key, res.merged_candidates, res.confirmed, res.requests_used,
                         res.total_elapsed, res.rank_of(truth_key))
            s["rule"] = res.rule
            s["stage"] = res.confirmed_stage
            s["stages_run"] = list(res.outcomes)
        else:
            out = SEARCHES[name](fresh(), source_id)
            s = _summary(truth_key, out.candidates, out.confirmed, out.requests_used, out.elapsed,
                         rank_of_correct(out, truth_key))
            if name == PROFILE:
                nr = [(corpus.target, uid) for uid in out.non_ranked]
                s["non_ranked_rank"] = nr.index(truth_key) + 1 if truth_key in nr else None
            if out.error:
                s["error"] = out.error
        rec.runs[name] = s

    if PROFILE in which:
        # every sub-method run to completion, for attribution only
        full = profile_search(fresh(), source_id, exhaustive=True)
        for c in full.candidates:
            if c.key == truth_key:
                rec.sub_methods = tuple(m for m in SUB_METHODS if m in c.tags)
    return rec


def sub_method_table(sets: list[tuple[str, ...]]) -> dict:
    """Union counts for every combination of URL/SU/NL, plus exclusive Venn regions.

    Unions are counted directly; the exclusive regions and the inclusion-
    exclusion identities are derived from the same per-query membership.
    """
    members = [frozenset(s) for s in sets]
    unions = {}
    for r in range(1, len(SUB_METHODS) + 1):
        for combo in combinations(SUB_METHODS, r):
            unions["+".join(combo)] = sum(1 for m in members if m & set(combo))
    regions = {}
    for r in range(1, len(SUB_METHODS) + 1):
        for combo in combinations(SUB_METHODS, r):
            regions["+".join(combo)] = sum(1 for m in members if m == frozenset(combo))
    intersections = {}
    for r in range(2, len(SUB_METHODS) + 1):
        for combo in combinations(SUB_METHODS, r):
            intersections["&".join(combo)] = sum(1 for m in members if m >= set(combo))
    return {"unions": unions, "regions": regions, "intersections": intersections}


def _final_url(corpus: Corpus, url: str) -> str | None:
    current = canonical_url(url)
    seen = {current}
    for _ in range(MAX_REDIRECTS):
        page = corpus.page(current)
        if page is None or page.redirects_to is None:
            return current
        current = canonical_url(page.redirects_to)
        if current in seen:
            return None
        seen.add(current)
    page = corpus.page(current)
    return current if page is None or page.redirects_to is None else None


def domain_frequency_report(corpus: Corpus, user_ids=None, recent: int = 100) -> list[tuple[str, float, int]]:
    """Share of users linking each social network from their recent posts.

    Returns (network, percent of users, user count) sorted by share, descending.
    URLs are followed through redirects; the modelled networks count under
    their own labels.
    """
    if user_ids is None:
        user_ids = [p.source_id for p in corpus.groundtruth]
    user_ids = list(user_ids)
    if not user_ids:
        return []
    own = {domain: label for label, domain in corpus.domains.items()}
    counts: Counter[str] = Counter()
    for uid in user_ids:
        linked = set()
        for post in corpus.posts_of(corpus.source, uid)[:recent]:
            for url in post.urls:
                final = _final_url(corpus, url)
                if final is None:
                    continue
                domain = url_domain(final)
                name = own.get(domain) or known_network(domain)
                if name:
                    linked.add(name)
        counts.update(linked)
    n = len(user_ids)
    rows = [(name, 100.0 * c / n, c) for name, c in counts.items()]
    rows.sort(key=lambda r: (-r[2], r[0]))
    return rows


@dataclass
class EvalReport:
    corpus_id: str
    queried: int
    which: tuple[str, ...]
    policy: dict
    rate_limit: dict
    metrics: dict[str, dict]
    sub_methods: dict | None
    domains: list[tuple[str, float, int]]
    queries: list[QueryRecord]

    def accuracy(self, name: str) -> float:
        return self.metrics[name]["accuracy"]

    def identified(self, name: str) -> int:
        return self.metrics[name]["identified_count"]

    def to_dict(self) -> dict:
        return {
            "corpus_id": self.corpus_id,
            "queried": self.queried,
            "which": list(self.which),
            "policy": self.policy,
            "rate_limit": self.rate_limit,
            "metrics": self.metrics,
            "sub_methods": self.sub_methods,
            "domains": [{"network": n, "percent": round(p, 6), "users": c} for n, p, c in self.domains],
            "queries": [q.to_dict() for q in self.queries],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_table(self) -> str:
        lines = [f"corpus {self.corpus_id}, {self.queried} queries", ""]
        head = f"{'algorithm':<13} {'identified':>10} {'accuracy':>9} {'mean size':>10} {'requests':>9} {'time (s)':>12}"
        lines += [head, "-" * len(head)]
        for name in self.which:
            m = self.metrics[name]
            lines.append(
                f"{name:<13} {m['identified_count']:>10} {m['accuracy']:>9.4f} {m['mean_candidates']:>10.2f}"
                f" {m['requests_total']:>9} {m['elapsed_total']:>12.1f}"
            )
        if self.sub_methods:
            lines += ["", "profile sub-methods (users identified by any listed method)"]
            for combo, count in self.sub_methods["unions"].items():
                lines.append(f"  {combo:<10} {count:>6}")
        if PROFILE in self.metrics and "top10" in self.metrics[PROFILE]:
            m = self.metrics[PROFILE]
            lines += [
                "",
                f"profile ranking: top-10 {m['top10']}/{m['identified_count']},"
                f" mean rank {m['mean_rank']:.3f} ranked vs {m['mean_non_ranked_rank']:.3f} non-ranked",
            ]
        if self.domains:
            lines += ["", "networks linked from posts"]
            for name, pct, count in self.domains:
                lines.append(f"  {name:<12} {pct:6.1f}%  ({count})")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["algorithm", "identified", "queried", "accuracy", "mean_candidates", "requests", "elapsed"])
        for name in self.which:
            m = self.metrics[name]
            w.writerow([name, m["identified_count"], self.queried, m["accuracy"], m["mean_candidates"],
                        m["requests_total"], m["elapsed_total"]])
        return buf.getvalue()


def _metrics(name: str, records: list[QueryRecord]) -> dict:
    runs = [r.runs[name] for r in records]
    n = len(runs)
    ident = [s for s in runs if s["identified"]]
    m = {
        "queried": n,
        "identified_count": len(ident),
        "accuracy": len(ident) / n if n else 0.0,
        "confirmed_count": sum(1 for s in runs if s["confirmed"] is not None),
        "confirmed_correct": sum(1 for r, s in zip(records, runs) if s["confirmed"] == r.target_id),
        "mean_candidates": _q(sum(s["candidates"] for s in runs) / n) if n else 0.0,
        "candidate_set_size": _hist(str(s["candidates"]) for s in runs),
        "rank_of_correct": _hist(str(s["rank"]) if s["rank"] is not None else ABSENT for s in runs),
        "elapsed": _hist(_elapsed_bin(s["elapsed"]) for s in runs),
        "requests_total": sum(s["requests"] for s in runs),
        "elapsed_total": _q(sum(s["elapsed"] for s in runs)),
    }
    ranks = [s["rank"] for s in ident]
    m["top10"] = sum(1 for k in ranks if k <= 10)
    m["mean_rank"] = _q(sum(ranks) / len(ranks)) if ranks else 0.0
    if name == PROFILE:
        nr = [s["non_ranked_rank"] for s in ident]
        m["non_ranked_top10"] = sum(1 for k in nr if k is not None and k <= 10)
        m["mean_non_ranked_rank"] = _q(sum(nr) / len(nr)) if nr else 0.0
    if name == INTEGRATED:
        m["confirmed_by_rule"] = dict(sorted(Counter(s["rule"] for s in runs if s["rule"]).items()))
        m["confirmed_at_stage"] = dict(sorted(Counter(s["stage"] for s in runs if s["stage"]).items()))
    return m


def _selection(which: str | tuple[str, ...]) -> tuple[str, ...]:
    if which == "all":
        return (*ALGORITHMS, INTEGRATED)
    if isinstance(which, str):
        which = tuple(w.strip() for w in which.split(","))
    for w in which:
        if w not in ALGORITHMS and w != INTEGRATED:
            raise ValueError(f"unknown algorithm {w!r}; choose from {(*ALGORITHMS, INTEGRATED)} or 'all'")
    return tuple(which)


def evaluate(
    corpus: Corpus,
    policy: OrchestrationPolicy | None = None,
    which: str | tuple[str, ...] = "all",
    *,
    jobs: int = 1,
    rate_limit: RateLimitPolicy | None = None,
) -> EvalReport:
    """Run the selected algorithms for every ground-truth pair and aggregate the metrics.

    A query counts as identified when its true target appears anywhere in the
    candidate set; ranks are reported separately.
    """
    if not corpus.groundtruth:
        raise CorpusError("corpus has no ground truth to evaluate against")
    if jobs < 1:
        raise ValueError("jobs must be at least 1")
    policy = policy or OrchestrationPolicy()
    rate = rate_limit or RateLimitPolicy()
    selected = _selection(which)
    pairs = sorted(corpus.groundtruth, key=lambda p: p.source_id)

    def one(pair):
        return _evaluate_query(corpus, pair.source_id, pair.target_id, selected, policy, rate)

    if jobs == 1:
        records = [one(p) for p in pairs]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(one, pairs))
    records.sort(key=lambda r: r.source_id)

    return EvalReport(
        corpus_id=corpus.corpus_id,
        queried=len(records),
        which=selected,
        policy={"order": list(policy.order), "early_exit": policy.early_exit, "concurrent": policy.concurrent},
        rate_limit={"max_requests": rate.max_requests, "window": rate.window},
        metrics={name: _metrics(name, records) for name in selected},
        sub_methods=sub_method_table([r.sub_methods for r in records]) if PROFILE in selected else None,
        domains=domain_frequency_report(corpus, [r.source_id for r in records]),
        queries=records,
    )


COMPARED = ("identified_count", "accuracy", "confirmed_count", "mean_candidates", "requests_total", "elapsed_total")


def compare_runs(a: EvalReport, b: EvalReport) -> dict[str, dict[str, float]]:
    """Per-metric deltas ``b - a`` for every algorithm evaluated in both reports."""
    if a.corpus_id != b.corpus_id:
        raise ValueError(f"reports come from different corpora ({a.corpus_id} vs {b.corpus_id})")
    diff = {}
    for name in a.which:
        if name not in b.metrics:
            continue
        ma, mb = a.metrics[name], b.metrics[name]
        diff[name] = {k: _q(mb[k] - ma[k]) for k in COMPARED}
    return diff
