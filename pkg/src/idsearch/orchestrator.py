"""Integrated search: run the four algorithms in order, stop on confirmation, OR the candidate sets."""

from __future__ import annotations

import contextvars
import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Mapping

from .algorithms import SEARCHES
from .connectors import ConnectorError, FixtureConnector, NotFound
from .model import (
    ALGORITHMS,
    CONTENT,
    NETWORK,
    PROFILE,
    SELF_MENTION,
    AlgorithmOutcome,
    Candidate,
    Identity,
    SearchResult,
    assign_ranks,
    dedupe_candidates,
)

log = logging.getLogger(__name__)

DEFAULT_ORDER = (PROFILE, SELF_MENTION, CONTENT, NETWORK)

RULE_NAMES = {
    PROFILE: "self-identification",
    SELF_MENTION: "self-mention",
    NETWORK: "network confirmation",
}
MULTI_ALGORITHM = "multi-algorithm agreement"


@dataclass(frozen=True)
class OrchestrationPolicy:
    order: tuple[str, ...] = DEFAULT_ORDER
    early_exit: bool = True
    concurrent: bool = False

    def __post_init__(self):
        if sorted(self.order) != sorted(ALGORITHMS):
            raise ValueError(f"order must be a permutation of {ALGORITHMS}, got {self.order}")

    @classmethod
    def parse_order(cls, text: str, **kw) -> "OrchestrationPolicy":
        aliases = {"selfmention": SELF_MENTION, "self-mention": SELF_MENTION, "sm": SELF_MENTION}
        order = tuple(aliases.get(t.strip().lower(), t.strip().lower()) for t in text.split(","))
        return cls(order=order, **kw)


def _check_rules(outcomes: Mapping[str, AlgorithmOutcome], seen: list[str]) -> tuple[Identity | None, str | None]:
    """Confirmation after the algorithms in ``seen`` (in run order) have finished.

    An algorithm's own confirmation outranks agreement between algorithms;
    among confirmations the earliest stage wins.
    """
    for name in seen:
        out = outcomes[name]
        if out.confirmed is not None:
            return out.confirmed, RULE_NAMES.get(name, name)
    merged = dedupe_candidates(c for name in seen for c in outcomes[name].candidates)
    agreed = [c for c in merged if len(c.provenance) >= 2]
    if agreed:
        best = max(agreed, key=lambda c: len(c.provenance))
        return best.identity, MULTI_ALGORITHM
    return None, None


def _run(conn: FixtureConnector, name: str, nemo_id: str) -> AlgorithmOutcome:
    try:
        return SEARCHES[name](conn, nemo_id)
    except NotFound as exc:
        if exc.network == conn.source and exc.user_id == nemo_id:
            raise
        log.warning("%s search failed for %s: %s", name, nemo_id, exc)
        return AlgorithmOutcome(name, error=str(exc))
    except ConnectorError as exc:
        log.warning("%s search failed for %s: %s", name, nemo_id, exc)
        return AlgorithmOutcome(name, error=str(exc))


def find_nemo(conn: FixtureConnector, nemo_id: str, policy: OrchestrationPolicy | None = None) -> SearchResult:
    """Search the target network for the source user ``nemo_id`` with all four algorithms.

    After each stage the confirmation rules are checked; with early exit on,
    the run stops at the first confirmation. The merged candidate list is the
    deduplicated union of every completed stage, with any confirmed identity
    moved to rank 1.
    """
    policy = policy or OrchestrationPolicy()
    nemo = conn.corpus.get(conn.source, nemo_id)
    if nemo is None:
        raise NotFound(conn.source, nemo_id)

    outcomes: dict[str, AlgorithmOutcome] = {}
    seen: list[str] = []
    confirmed = rule = stage = None

    def record(name: str, out: AlgorithmOutcome) -> bool:
        nonlocal confirmed, rule, stage
        outcomes[name] = out
        seen.append(name)
        if confirmed is None:
            confirmed, rule = _check_rules(outcomes, seen)
            if confirmed is not None:
                stage = name
                return policy.early_exit
        return False

    if policy.concurrent:
        with ThreadPoolExecutor(max_workers=len(policy.order)) as pool:
            futures = {
                pool.submit(contextvars.copy_context().run, _run, conn, name, nemo_id): name
                for name in policy.order
            }
            for fut in as_completed(futures):
                if record(futures[fut], fut.result()):
                    break
    else:
        for name in policy.order:
            if record(name, _run(conn, name, nemo_id)):
                break

    merged = dedupe_candidates(c for name in seen for c in outcomes[name].candidates)
    if confirmed is not None:
        head = [c for c in merged if c.key == confirmed.key]
        merged = head + [c for c in merged if c.key != confirmed.key]
    return SearchResult(
        query=nemo,
        outcomes=outcomes,
        merged_candidates=tuple(assign_ranks(merged)),
        confirmed=confirmed,
        rule=rule,
        confirmed_stage=stage,
        total_elapsed=sum(o.elapsed for o in outcomes.values()),
        errors={n: o.error for n, o in outcomes.items() if o.error},
    )


def _fmt_scores(c: Candidate) -> str:
    return ", ".join(f"{k}={v:.3f}" for k, v in sorted(c.scores.items())) or "-"


def explain(result: SearchResult, limit: int | None = 25) -> str:
    """Human-readable account of a search: confirmation, candidates with provenance, per-stage cost."""
    q = result.query
    lines = [f"query: {q.network}/{q.user_id} @{q.username} ({q.display_name})"]
    if result.confirmed is not None:
        c = result.confirmed
        lines.append(
            f"confirmed: {c.network}/{c.user_id} @{c.username} ({c.display_name})"
            f" by {result.rule} at stage {result.confirmed_stage}"
        )
    else:
        lines.append("confirmed: none")

    cands = result.merged_candidates
    if not cands:
        lines.append("no candidates")
    else:
        lines.append(f"candidates: {len(cands)}")
        shown = cands if limit is None else cands[:limit]
        for c in shown:
            extra = []
            if c.tags:
                extra.append("sub-methods=" + "+".join(sorted(c.tags)))
            if c.mention_count:
                extra.append(f"mentions={c.mention_count}")
            if c.no_image:
                extra.append("no-image")
            lines.append(
                f"  {c.rank:>3}. {c.identity.user_id:<14} @{c.identity.username:<20} "
                f"{'+'.join(sorted(c.provenance)):<24} {_fmt_scores(c)}"
                + (f"  [{'; '.join(extra)}]" if extra else "")
            )
        if len(shown) < len(cands):
            lines.append(f"  ... {len(cands) - len(shown)} more")

    lines.append("stages:")
    for name, out in result.outcomes.items():
        status = f"error: {out.error}" if out.error else f"{len(out.candidates)} candidates"
        lines.append(f"  {name:<13} requests={out.requests_used:<5} time={out.elapsed:9.1f}s  {status}")
    lines.append(f"total: requests={result.requests_used} time={result.total_elapsed:.1f}s")
    return "\n".join(lines) + "\n"
