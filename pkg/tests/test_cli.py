import json

import pytest

from run import main


def test_fixtures_command(tmp_path, capsys):
    assert main(["fixtures", "--out", str(tmp_path)]) == 0
    counts = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert counts["minipy.train.jsonl"] == 160
    assert (tmp_path / "manifest.json").exists()


def test_stats_and_oracle_commands(tmp_path, fixture_dir, capsys):
    data = str(fixture_dir / "minipy.dev.jsonl")
    assert main(["stats", "--data", data, "--closure-k", "2"]) == 0
    assert "Avg. # actions per example" in capsys.readouterr().out

    out = tmp_path / "oracle.jsonl"
    assert main(["oracle", "--data", data, "--out", str(out)]) == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 20
    first = json.loads(lines[0])
    assert first["actions"][0]["kind"] == "rule"
    assert first["actions"][0]["parent"] == -1


def test_induce_grammar_and_closure_commands(tmp_path, fixture_dir):
    data = str(fixture_dir / "minipy.train.jsonl")
    induced = tmp_path / "induced.grammar"
    assert main(["induce-grammar", "--data", data, "--out", str(induced)]) == 0
    closed = tmp_path / "closed.grammar"
    assert main(["closure", "--data", data, "--grammar", str(induced), "--closure-k", "3",
                 "--out", str(closed)]) == 0
    assert "closure " in closed.read_text(encoding="utf-8")


def test_gradcheck_command(tmp_path):
    out = tmp_path / "gradcheck.json"
    assert main(["gradcheck", "--out", str(out)]) == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["passed"]


def test_usage_errors(capsys):
    assert main([]) == 1
    assert main(["decode", "--model", "x.ckpt"]) == 1
    assert "E:usage:" in capsys.readouterr().err


def test_bad_config_is_a_usage_error(tmp_path, fixture_dir, capsys):
    data = str(fixture_dir / "minipy.train.jsonl")
    assert main(["train", "--data", data, "--dropout", "0.5", "--out", str(tmp_path)]) == 1
    assert "E:config:" in capsys.readouterr().err


def test_missing_data_file(tmp_path, capsys):
    assert main(["stats", "--data", str(tmp_path / "absent.jsonl")]) == 2
    assert "E:io:" in capsys.readouterr().err


def test_corrupt_checkpoint(tmp_path, fixture_dir, capsys):
    model = tmp_path / "model.ckpt"
    model.write_bytes(b"garbage")
    assert main(["decode", "--model", str(model), "--input", str(fixture_dir / "minipy.test.jsonl")]) == 2
    assert "E:checkpoint:" in capsys.readouterr().err


def test_decode_and_eval_round_trip(tmp_path, fixture_dir, capsys, minipy_grammar, minipy_corpus):
    from conftest import make_model
    from synforge.data.vocab import build_vocab
    from training.checkpoint import save_checkpoint

    vocab = build_vocab(minipy_corpus, 3, 3)
    checkpoint = tmp_path / "model.ckpt"
    save_checkpoint(checkpoint, make_model(minipy_grammar, vocab), minipy_grammar, vocab)
    test = str(fixture_dir / "minipy.test.jsonl")
    pred = tmp_path / "pred.jsonl"
    assert main(["decode", "--model", str(checkpoint), "--input", test, "--beam", "2", "--max-steps", "40",
                 "--n-best", "2", "--out", str(pred)]) == 0
    records = [json.loads(line) for line in pred.read_text(encoding="utf-8").splitlines()]
    assert len(records) == 20

    report = tmp_path / "report.json"
    assert main(["eval", "--data", test, "--pred", str(pred), "--out", str(report)]) == 0
    scores = json.loads(report.read_text(encoding="utf-8"))
    assert scores["n_examples"] == 20
    assert 0.0 <= scores["accuracy"] <= 1.0


@pytest.mark.parametrize("command", ["stats", "oracle"])
def test_unknown_language_flag(command, fixture_dir):
    assert main([command, "--data", str(fixture_dir / "minipy.dev.jsonl"), "--language", "cobol"]) == 1


def test_eval_averages_several_runs(tmp_path, fixture_dir, minipy_corpus):
    from test_harness import gold_record

    test = fixture_dir / "minipy.test.jsonl"
    gold = {e.id: gold_record(e) for e in minipy_corpus}
    ids = [json.loads(line)["id"] for line in test.read_text(encoding="utf-8").splitlines()]
    paths = []
    for run in range(2):
        path = tmp_path / f"run{run}.jsonl"
        kept = ids if run == 0 else ids[:10]
        path.write_text("".join(json.dumps(gold[i]) + "\n" for i in kept), encoding="utf-8")
        paths.append(str(path))
    out = tmp_path / "report.json"
    assert main(["eval", "--data", str(test), "--pred", *paths, "--out", str(out)]) == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["n_runs"] == 2
    assert report["accuracy"] == pytest.approx(0.75)
    assert [r["accuracy"] for r in report["runs"]] == [1.0, 0.5]


@pytest.mark.parametrize("flags", [
    ["--beam", "0"],
    ["--max-steps", "0"],
    ["--n-best", "-2"],
    ["--beam", "wide"],
])
def test_decode_sizes_must_be_positive(flags, capsys):
    assert main(["decode", "--model", "x.ckpt", "--input", "x.jsonl", *flags]) == 1
    assert "E:usage:" in capsys.readouterr().err


def test_gradcheck_needs_a_sample(capsys):
    assert main(["gradcheck", "--samples", "0"]) == 1
    assert "E:usage:" in capsys.readouterr().err


def test_value_errors_become_data_errors(monkeypatch, fixture_dir, capsys):
    import run

    def broken(args):
        raise ValueError("beam size must be >= 1, got 0")

    monkeypatch.setitem(run.COMMANDS, "stats", broken)
    assert main(["stats", "--data", str(fixture_dir / "minipy.dev.jsonl")]) == 2
    assert "E:data:beam size must be >= 1" in capsys.readouterr().err


def test_dropout_sweep_flags(tmp_path, fixture_dir, capsys):
    data = str(fixture_dir / "minipy.train.jsonl")
    dev = str(fixture_dir / "minipy.dev.jsonl")
    assert main(["train", "--data", data, "--dev", dev, "--dropout", "0.2", "--sweep-dropout",
                 "--out", str(tmp_path)]) == 1
    assert "E:config:" in capsys.readouterr().err
    assert main(["train", "--data", data, "--sweep-dropout", "--out", str(tmp_path)]) == 1
    assert "dev_file" in capsys.readouterr().err
