"""``idsearch`` command line: generate a corpus, search for one user, evaluate a corpus.

Exit codes: 0 success, 1 internal error, 2 bad input (usage, missing corpus, unknown id).
Reports go to stdout; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .connectors import FixtureConnector, NotFound, RateLimitPolicy
from .corpus import Corpus, CorpusError
from .evaluation import evaluate
from .generate import generate, preset, read_config
from .orchestrator import OrchestrationPolicy, explain, find_nemo

log = logging.getLogger("idsearch")

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT = 0, 1, 2
PRESETS = ("paper", "dense", "sparse", "image", "zero")


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="idsearch", description="Cross-network identity search over offline corpora.")
    p.add_argument("-v", "--verbose", action="count", default=0, help="more diagnostics on stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a synthetic corpus with ground truth")
    g.add_argument("--out", required=True, help="corpus directory to write")
    src = g.add_mutually_exclusive_group()
    src.add_argument("--preset", choices=PRESETS, default="paper")
    src.add_argument("--config", help="JSON file of corpus configuration fields")
    g.add_argument("--seed", type=int, help="override the configuration seed")
    g.add_argument("--users", type=int, help="override the number of paired users")

    def policy_flags(sp):
        sp.add_argument("--corpus", required=True, help="corpus directory")
        sp.add_argument("--order", help="comma-separated algorithm order, e.g. profile,self_mention,content,network")
        sp.add_argument("--no-early-exit", action="store_true", help="run every stage even after a confirmation")
        sp.add_argument("--rate-limit", default="350/3600", metavar="R/W", help="R requests per W seconds")
        sp.add_argument("--format", choices=("json", "table", "csv"), default="table")

    s = sub.add_parser("search", help="search the target network for one source user")
    policy_flags(s)
    s.add_argument("user_id", help="source-network user id")
    s.add_argument("--concurrent", action="store_true", help="run the stages in parallel")
    s.add_argument("--limit", type=int, default=25, help="candidates to list in the table format")

    e = sub.add_parser("eval", help="evaluate every ground-truth pair of a corpus")
    policy_flags(e)
    e.add_argument("--algorithm", default="all", help="profile, content, self_mention, network, integrated or all")
    e.add_argument("--jobs", type=int, default=1, help="queries evaluated in parallel")
    e.add_argument("--out", help="also write the JSON report to this file")
    e.add_argument("--seed", type=int, help="accepted for symmetry; evaluation itself is deterministic")
    return p


def _policy(args) -> OrchestrationPolicy:
    kw = {"early_exit": not args.no_early_exit, "concurrent": getattr(args, "concurrent", False)}
    try:
        if args.order:
            return OrchestrationPolicy.parse_order(args.order, **kw)
        return OrchestrationPolicy(**kw)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _rate(args) -> RateLimitPolicy:
    try:
        return RateLimitPolicy.parse(args.rate_limit)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _load(path: str) -> Corpus:
    if not Path(path).is_dir():
        raise InputError(f"corpus directory {path} does not exist")
    try:
        return Corpus.load(path)
    except CorpusError as exc:
        raise InputError(str(exc)) from exc


def cmd_generate(args) -> int:
    try:
        if args.config:
            config = read_config(args.config)
            if args.seed is not None or args.users is not None:
                d = config.to_dict()
                d.update({k: v for k, v in (("seed", args.seed), ("n_users", args.users)) if v is not None})
                config = type(config).from_dict(d)
        else:
            config = preset(args.preset, seed=args.seed, n_users=args.users)
    except (OSError, ValueError, TypeError) as exc:
        raise InputError(f"bad corpus configuration: {exc}") from exc
    corpus = generate(config, args.out)
    log.info("wrote corpus %s to %s", corpus.corpus_id, args.out)
    print(json.dumps({"out": str(args.out), "corpus_id": corpus.corpus_id, "identities": len(corpus.identities),
                      "pairs": len(corpus.groundtruth), "planted": corpus.manifest["planted"]}, sort_keys=True))
    return EXIT_OK


def _result_json(result) -> dict:
    def cand(c):
        return {"rank": c.rank, "user_id": c.identity.user_id, "username": c.identity.username,
                "display_name": c.identity.display_name, "provenance": sorted(c.provenance),
                "scores": {k: round(v, 9) for k, v in sorted(c.scores.items())},
                "sub_methods": sorted(c.tags), "mention_count": c.mention_count, "no_image": c.no_image}

    conf = result.confirmed
    return {
        "query": result.query.user_id,
        "confirmed": None if conf is None else {"user_id": conf.user_id, "username": conf.username,
                                                "rule": result.rule, "stage": result.confirmed_stage},
        "candidates": [cand(c) for c in result.merged_candidates],
        "stages": {n: {"requests": o.requests_used, "elapsed": round(o.elapsed, 6), "candidates": len(o.candidates),
                       "error": o.error} for n, o in result.outcomes.items()},
        "requests": result.requests_used,
        "elapsed": round(result.total_elapsed, 6),
    }


def cmd_search(args) -> int:
    policy, rate = _policy(args), _rate(args)
    corpus = _load(args.corpus)
    try:
        result = find_nemo(FixtureConnector(corpus, rate), args.user_id, policy)
    except NotFound as exc:
        raise InputError(str(exc)) from exc
    if args.format == "json":
        sys.stdout.write(json.dumps(_result_json(result), indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(explain(result, limit=args.limit))
    return EXIT_OK


def cmd_eval(args) -> int:
    policy, rate = _policy(args), _rate(args)
    if args.jobs < 1:
        raise InputError("--jobs must be at least 1")
    corpus = _load(args.corpus)
    try:
        report = evaluate(corpus, policy, args.algorithm, jobs=args.jobs, rate_limit=rate)
    except (CorpusError, ValueError) as exc:
        raise InputError(str(exc)) from exc
    if args.out:
        Path(args.out).write_text(report.to_json())
    out = {"json": report.to_json, "table": report.to_table, "csv": report.to_csv}[args.format]()
    sys.stdout.write(out)
    return EXIT_OK


COMMANDS = {"generate": cmd_generate, "search": cmd_search, "eval": cmd_eval}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except InputError as exc:
        print(f"idsearch: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        print(f"idsearch: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:
        log.debug("internal error", exc_info=True)
        print(f"idsearch: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
