import json
from collections import Counter

import pytest

from synforge.data import (abstract_strings, build_vocab, canonicalize, load_dataset, read_jsonl,
                           restore_placeholders, tokenize_description)
from synforge.data.fixtures import write_fixtures
from synforge.data.vocab import SOURCE_SPECIALS, TERMINAL_SPECIALS, Vocab, VocabTable, frequency_table
from synforge.errors import DataError


def test_canonicalize_replaces_quoted_spans():
    tokens, table = canonicalize("open the file 'data.txt' in mode \"r\"")
    assert table == {0: "data.txt", 1: "r"}
    assert tokens == ["open", "the", "file", "_STR:0_", "in", "mode", "_STR:1_"]


def test_dotted_references_are_followed_by_their_parts():
    assert tokenize_description("call self.makekey(x)") == [
        "call", "self.makekey", "self", "makekey", "(", "x", ")"]


def test_placeholders_round_trip_through_code():
    _, table = canonicalize("print 'hello world' or 'bye'")
    code = "if x:\n    print('hello world')\nelse:\n    print('bye')"
    abstracted = abstract_strings(code, table)
    assert "_STR:0_" in abstracted and "_STR:1_" in abstracted
    assert "hello" not in abstracted
    assert restore_placeholders(abstracted, table) == code
    # a placeholder generated outside quotes becomes a literal
    assert restore_placeholders("x = _STR:1_", table) == "x = 'bye'"
    with pytest.raises(DataError):
        restore_placeholders("x = '_STR:7_'", table)
    assert restore_placeholders("x = '_STR:7_'", table, strict=False) == "x = '_STR:7_'"


def test_frequency_table_order():
    counts = Counter({"b": 3, "a": 3, "c": 5, "rare": 1})
    table = frequency_table(counts, SOURCE_SPECIALS, 2)
    assert table.itos == ["<pad>", "<unk>", "c", "a", "b"]
    assert table.encode(["a", "rare"]) == [3, 1]
    with pytest.raises(ValueError):
        frequency_table(counts, SOURCE_SPECIALS, 0)
    with pytest.raises(ValueError):
        VocabTable(["<pad>", "x"])


def test_build_vocab_applies_cutoffs(minipy_corpus):
    low = build_vocab(minipy_corpus, 1, 1)
    high = build_vocab(minipy_corpus, 5, 5)
    assert low.source.itos[:2] == list(SOURCE_SPECIALS)
    assert high.terminal.itos[:2] == list(TERMINAL_SPECIALS)
    assert len(high.source) < len(low.source)
    assert len(high.terminal) < len(low.terminal)
    assert set(high.terminal) <= set(low.terminal)
    counts = Counter(tok for e in minipy_corpus for node in e.ast.iter_preorder()
                     if node.type.is_variable for tok in node.tokens)
    assert all(counts[word] >= 5 for word in high.terminal.itos[2:])


def test_vocab_dict_round_trip(minipy_vocab):
    loaded = Vocab.from_dict(json.loads(json.dumps(minipy_vocab.to_dict())))
    assert loaded.vocab_hash == minipy_vocab.vocab_hash
    assert loaded.d_source == 3


def test_read_jsonl_reports_the_bad_line(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"id": 1, "nl": "a", "code": "x = 1"}\n{oops\n', encoding="utf-8")
    with pytest.raises(DataError, match="example 1:") as info:
        read_jsonl(path)
    assert info.value.index == 1


def test_load_dataset_skips_and_counts(tmp_path, minipy_grammar):
    path = tmp_path / "mixed.jsonl"
    records = [
        {"id": "ok", "nl": "set x to 1", "code": "x = 1"},
        {"id": "bad", "nl": "nonsense", "code": "x = = 1"},
        {"id": "ok2", "nl": "print 'hi'", "code": "print('hi')"},
    ]
    path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")
    corpus = load_dataset(path, minipy_grammar, "minipy")
    assert [e.id for e in corpus] == ["ok", "ok2"]
    assert [ix for ix, _ in corpus.skipped] == [1]
    assert corpus[1].placeholders == {0: "hi"}
    assert corpus[1].gold_code() == "print('hi')"


def test_load_dataset_requires_fields(tmp_path, minipy_grammar):
    path = tmp_path / "missing.jsonl"
    path.write_text('{"id": "a", "nl": "set x"}\n', encoding="utf-8")
    with pytest.raises(DataError, match="code"):
        load_dataset(path, minipy_grammar, "minipy")


def test_fixtures_rebuild_the_committed_data(tmp_path, fixture_dir):
    manifest = write_fixtures(tmp_path)
    assert manifest["counts"] == {
        "minipy.train.jsonl": 160, "minipy.dev.jsonl": 20, "minipy.test.jsonl": 20,
        "flowdsl.train.jsonl": 80, "flowdsl.dev.jsonl": 10, "flowdsl.test.jsonl": 10,
        "minipy_overfit.jsonl": 30, "copy.jsonl": 40,
    }
    for name in [*manifest["counts"], "manifest.json"]:
        assert (tmp_path / name).read_bytes() == (fixture_dir / name).read_bytes(), name
    assert json.loads((fixture_dir / "manifest.json").read_text(encoding="utf-8")) == manifest


def test_overfit_subset_is_the_head_of_the_minipy_train_split(fixture_dir):
    train = (fixture_dir / "minipy.train.jsonl").read_text(encoding="utf-8").splitlines()
    overfit = (fixture_dir / "minipy_overfit.jsonl").read_text(encoding="utf-8").splitlines()
    assert overfit == train[:30]


def test_copy_fixture_words_occur_once(fixture_dir, minipy_grammar):
    corpus = load_dataset(fixture_dir / "copy.jsonl", minipy_grammar, "minipy")
    assert len(corpus) == 40
    oov = [next(tok for tok in e.src_tokens if tok.startswith("v") and len(tok) == 6) for e in corpus]
    assert len(set(oov)) == 40
    for word, example in zip(oov, corpus):
        assert word in example.code
