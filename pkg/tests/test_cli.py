import json

import pytest

from idsearch.cli import main
from idsearch.generate import CorpusConfig, write_config


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus")
    assert main(["generate", "--preset", "dense", "--users", "40", "--out", str(out)]) == 0
    return out


def first_pair(path, label=None):
    for line in (path / "groundtruth.jsonl").read_text().splitlines():
        rec = json.loads(line)
        if label is None or label in rec["leak_labels"]:
            return rec
    raise LookupError(label)


def test_generate_writes_files(corpus_dir, capsys):
    for name in ("identities.jsonl", "posts.jsonl", "edges.jsonl", "pages.jsonl", "groundtruth.jsonl", "manifest.json"):
        assert (corpus_dir / name).is_file()


def test_generate_missing_out_is_usage_error(capsys):
    assert main(["generate", "--preset", "paper"]) == 2
    err = capsys.readouterr().err
    assert "--out" in err


def test_generate_from_config_file(tmp_path, capsys):
    write_config(CorpusConfig(n_users=12, seed=5), tmp_path / "cfg.json")
    assert main(["generate", "--config", str(tmp_path / "cfg.json"), "--out", str(tmp_path / "c")]) == 0
    assert json.loads(capsys.readouterr().out)["pairs"] == 12
    (tmp_path / "bad.json").write_text('{"n_users": -1}')
    assert main(["generate", "--config", str(tmp_path / "bad.json"), "--out", str(tmp_path / "d")]) == 2


def test_search_self_identified(corpus_dir, capsys):
    pair = first_pair(corpus_dir, "self_id_direct")
    assert main(["search", "--corpus", str(corpus_dir), pair["source_id"]]) == 0
    out = capsys.readouterr().out
    assert "self-identification" in out and pair["target_id"] in out


def test_search_no_early_exit_shows_all_stages(corpus_dir, capsys):
    pair = first_pair(corpus_dir, "self_id_direct")
    assert main(["search", "--corpus", str(corpus_dir), "--no-early-exit", pair["source_id"]]) == 0
    out = capsys.readouterr().out
    for stage in ("profile", "self_mention", "content", "network"):
        assert f"  {stage} " in out


def test_search_is_repeatable_and_json(corpus_dir, capsys):
    pair = first_pair(corpus_dir)
    args = ["search", "--corpus", str(corpus_dir), "--format", "json", pair["source_id"]]
    main(args)
    first = capsys.readouterr().out
    main(args)
    assert capsys.readouterr().out == first
    assert json.loads(first)["query"] == pair["source_id"]


@pytest.mark.parametrize(
    "args",
    [
        ["search", "--corpus", "{c}", "nobody"],
        ["search", "--corpus", "/no/such/dir", "x"],
        ["search", "--corpus", "{c}", "--order", "profile,content", "x"],
        ["search", "--corpus", "{c}", "--rate-limit", "lots", "x"],
        ["eval", "--corpus", "{c}", "--algorithm", "telepathy"],
        ["eval", "--corpus", "{c}", "--jobs", "0"],
        ["frobnicate"],
    ],
)
def test_bad_input_exit_code(corpus_dir, capsys, args):
    assert main([a.replace("{c}", str(corpus_dir)) for a in args]) == 2
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "error" in captured.err


def test_eval_outputs(corpus_dir, tmp_path, capsys):
    assert main(["eval", "--corpus", str(corpus_dir), "--algorithm", "profile", "--format", "json",
                 "--out", str(tmp_path / "r.json")]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert list(doc["metrics"]) == ["profile"]
    assert json.loads((tmp_path / "r.json").read_text()) == doc
    assert main(["eval", "--corpus", str(corpus_dir)]) == 0
    assert "integrated" in capsys.readouterr().out


def test_internal_error_exit_code(corpus_dir, capsys, monkeypatch):
    import idsearch.cli as cli

    def boom(*a, **kw):
        raise RuntimeError("kaput")

    monkeypatch.setattr(cli, "evaluate", boom)
    assert main(["eval", "--corpus", str(corpus_dir)]) == 1
    assert "kaput" in capsys.readouterr().err
