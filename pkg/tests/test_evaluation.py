import json

import pytest

from idsearch.corpus import CorpusError
from idsearch.evaluation import (
    INTEGRATED,
    compare_runs,
    domain_frequency_report,
    evaluate,
    rank_of_correct,
    sub_method_table,
)
from idsearch.generate import CorpusConfig, generate
from idsearch.model import ALGORITHMS, PROFILE, AlgorithmOutcome, Candidate
from idsearch.orchestrator import OrchestrationPolicy
from helpers import build, src, tgt


def test_rank_of_correct():
    a, b = tgt("a", "a", "A"), tgt("b", "b", "B")
    out = AlgorithmOutcome(PROFILE, tuple(Candidate(i, {}, frozenset({PROFILE})) for i in (a, b)), confirmed=a)
    assert rank_of_correct(out, a) == 1
    assert rank_of_correct(out, b.key) == 2
    assert rank_of_correct(out, ("target", "zz")) is None


def test_sub_method_table_inclusion_exclusion():
    sets = [("URL",), ("URL", "SU"), ("SU", "NL"), ("NL",), (), ("URL", "SU", "NL")]
    t = sub_method_table(sets)
    u, i = t["unions"], t["intersections"]
    assert u == {"URL": 3, "SU": 3, "NL": 3, "URL+SU": 4, "URL+NL": 5, "SU+NL": 4, "URL+SU+NL": 5}
    assert u["URL+SU"] == u["URL"] + u["SU"] - i["URL&SU"]
    assert u["URL+SU+NL"] == (u["URL"] + u["SU"] + u["NL"] - i["URL&SU"] - i["URL&NL"] - i["SU&NL"]
                              + i["URL&SU&NL"])
    assert sum(t["regions"].values()) == u["URL+SU+NL"]


def test_domain_report_trivial_cases():
    assert domain_frequency_report(build([src("n", "n", "N")]), ["n"]) == []
    corpus = build([src("n", "n", "N")], posts=[("n", "source", "pic https://instagr.am/p/1", 1)])
    assert domain_frequency_report(corpus, ["n"]) == [("Instagram", 100.0, 1)]
    assert domain_frequency_report(corpus, []) == []


def test_domain_report_follows_redirects_and_counts_users_once():
    people = [src("a", "a", "A"), src("b", "b", "B")]
    posts = [("a", "source", "http://sho.rt/1 and https://youtube.com/watch?v=x", 1),
             ("b", "source", "https://nemo.tumblr.com/post/2", 2)]
    corpus = build(people, posts, pages=[("http://sho.rt/1", "https://www.youtube.com/watch?v=y")])
    assert domain_frequency_report(corpus, ["a", "b"]) == [("Tumblr", 50.0, 1), ("Youtube", 50.0, 1)]


def test_evaluate_requires_ground_truth():
    with pytest.raises(CorpusError):
        evaluate(build([src("n", "n", "N")]))


def test_zero_leak_corpus_scores_zero():
    report = evaluate(generate(CorpusConfig(n_users=40, seed=8)))
    for name in (*ALGORITHMS, INTEGRATED):
        assert report.identified(name) == 0 and report.accuracy(name) == 0.0


def test_accuracy_is_exact_ratio(corpora):
    report = evaluate(corpora("sparse"), which=(PROFILE,))
    m = report.metrics[PROFILE]
    assert m["identified_count"] <= report.queried
    assert m["accuracy"] == m["identified_count"] / report.queried
    assert sum(m["candidate_set_size"].values()) == report.queried
    assert report.which == (PROFILE,)


def test_confirmed_truth_ranks_first(corpora):
    report = evaluate(corpora("dense"))
    for q in report.queries:
        for run in q.runs.values():
            if run["confirmed"] == q.target_id:
                assert run["rank"] == 1


def test_report_json_and_tables(corpora):
    report = evaluate(corpora("sparse"), which="profile,integrated")
    doc = json.loads(report.to_json())
    assert doc["metrics"].keys() == {PROFILE, INTEGRATED}
    assert "profile sub-methods" in report.to_table()
    assert report.to_csv().splitlines()[0].startswith("algorithm,identified")
    with pytest.raises(ValueError):
        evaluate(corpora("sparse"), which="telepathy")


def test_compare_runs(corpora):
    c = corpora("sparse")
    a = evaluate(c, which=INTEGRATED)
    assert all(v == 0 for d in compare_runs(a, a).values() for v in d.values())
    b = evaluate(c, OrchestrationPolicy(early_exit=False), which=INTEGRATED)
    assert compare_runs(b, a)[INTEGRATED]["requests_total"] <= 0
    other = evaluate(generate(CorpusConfig(n_users=10, seed=1)), which=INTEGRATED)
    with pytest.raises(ValueError):
        compare_runs(a, other)
