import pytest

from idsearch.algorithms import profile_search
from idsearch.connectors import FixtureConnector, NotFound
from idsearch.model import CONTENT, NETWORK, PROFILE, SELF_MENTION
from idsearch.orchestrator import MULTI_ALGORITHM, OrchestrationPolicy, explain, find_nemo
from helpers import build, src, tgt

QUOTE = "Stay hungry, stay foolish and keep going."


def test_policy_validation():
    with pytest.raises(ValueError):
        OrchestrationPolicy(order=(PROFILE, CONTENT))
    p = OrchestrationPolicy.parse_order("network, sm, content, profile")
    assert p.order == (NETWORK, SELF_MENTION, CONTENT, PROFILE)


def test_self_identification_halts_after_profile():
    corpus = build([src("n", "nemo", "Nemo", url_field="target.net/t"), tgt("t", "t", "T")])
    alone = profile_search(FixtureConnector(corpus), "n")
    res = find_nemo(FixtureConnector(corpus), "n")
    assert list(res.outcomes) == [PROFILE]
    assert res.requests_used == alone.requests_used
    assert res.rule == "self-identification" and res.confirmed_stage == PROFILE
    assert res.merged_candidates[0].user_id == "t"


def test_profile_and_content_agreement_confirms_at_content():
    people = [src("n", "nemo", "Nemo Fish"), tgt("t", "nemo", "Other Name"), tgt("u", "u", "U")]
    posts = [("n", "source", QUOTE, 1), ("t", "target", QUOTE, 2), ("u", "target", QUOTE, 3)]
    res = find_nemo(FixtureConnector(build(people, posts)), "n")
    assert res.confirmed.user_id == "t"
    assert res.rule == MULTI_ALGORITHM and res.confirmed_stage == CONTENT
    assert NETWORK not in res.outcomes
    assert res.merged_candidates[0].provenance == {PROFILE, CONTENT}


def test_no_confirmation_merges_everything():
    people = [src("n", "nemo", "Nemo Fish"), tgt("t", "nemo", "Other"), tgt("u", "u", "U")]
    posts = [("n", "source", QUOTE, 1), ("u", "target", QUOTE, 3)]
    res = find_nemo(FixtureConnector(build(people, posts)), "n")
    assert res.confirmed is None
    assert list(res.outcomes) == [PROFILE, SELF_MENTION, CONTENT, NETWORK]
    assert [c.user_id for c in res.merged_candidates] == ["t", "u"]
    assert [c.rank for c in res.merged_candidates] == [1, 2]


def test_no_early_exit_runs_all_but_keeps_first_confirmation():
    corpus = build([src("n", "nemo", "Nemo", url_field="target.net/t"), tgt("t", "t", "T")])
    res = find_nemo(FixtureConnector(corpus), "n", OrchestrationPolicy(early_exit=False))
    assert len(res.outcomes) == 4
    assert res.confirmed.user_id == "t" and res.confirmed_stage == PROFILE


def test_confirmed_moved_to_rank_one():
    # content finds "u" first; self-mention confirms "t" later in the order
    people = [src("n", "nemo", "Nemo"), tgt("t", "nemo_x", "T"), tgt("u", "u", "U")]
    posts = [("n", "source", QUOTE, 1), ("u", "target", QUOTE, 2),
             ("n", "source", "me https://target.net/nemo_x/p", 3)]
    policy = OrchestrationPolicy(order=(CONTENT, PROFILE, SELF_MENTION, NETWORK))
    res = find_nemo(FixtureConnector(build(people, posts)), "n", policy)
    assert res.confirmed_stage == SELF_MENTION
    assert [c.user_id for c in res.merged_candidates] == ["t", "u"]


def test_stage_failure_degrades_to_empty():
    class Broken(FixtureConnector):
        def fetch_recent_posts(self, ident, n=100):
            raise NotFound("target", "x")

    corpus = build([src("n", "nemo", "Nemo"), tgt("t", "nemo", "T")])
    res = find_nemo(Broken(corpus), "n")
    assert res.errors.keys() == {SELF_MENTION, CONTENT}
    assert [c.user_id for c in res.merged_candidates] == ["t"]


def test_unknown_nemo_raises():
    with pytest.raises(NotFound):
        find_nemo(FixtureConnector(build([])), "ghost")


def test_concurrent_matches_serial_without_confirmation():
    people = [src("n", "nemo", "Nemo Fish"), tgt("t", "nemo", "Other"), tgt("u", "u", "U")]
    posts = [("n", "source", QUOTE, 1), ("u", "target", QUOTE, 3)]
    corpus = build(people, posts)
    serial = find_nemo(FixtureConnector(corpus), "n")
    parallel = find_nemo(FixtureConnector(corpus), "n", OrchestrationPolicy(concurrent=True))
    assert {c.key for c in serial.merged_candidates} == {c.key for c in parallel.merged_candidates}
    assert serial.requests_used == parallel.requests_used
    assert {n: o.requests_used for n, o in serial.outcomes.items()} == {
        n: o.requests_used for n, o in parallel.outcomes.items()
    }


def test_explain_reports():
    corpus = build([src("n", "nemo", "Nemo", url_field="target.net/t"), tgt("t", "t", "T")])
    text = explain(find_nemo(FixtureConnector(corpus), "n"))
    assert "self-identification" in text and "requests=" in text
    empty = explain(find_nemo(FixtureConnector(build([src("n", "nemo", "Nemo")])), "n"))
    assert "no candidates" in empty and "confirmed: none" in empty


def test_explain_lists_every_provenance():
    people = [src("n", "nemo", "Nemo Fish"), tgt("t", "nemo", "Other")]
    posts = [("n", "source", QUOTE, 1), ("t", "target", QUOTE, 2)]
    text = explain(find_nemo(FixtureConnector(build(people, posts)), "n"))
    assert "content+profile" in text
    assert MULTI_ALGORITHM in text
