import copy
import json
from pathlib import Path

import pandas as pd
import pytest
import torch

from conftest import TINY_SIZES, make_model
from eval.harness import decode_examples
from synforge.data.dataset import Corpus, load_dataset
from synforge.errors import CheckpointError, ConfigError, DataError
from synforge.inference import decode_corpus
from synforge.models.syntax_parser import make_batch
from training.checkpoint import HEADER, MAGIC, checkpoint_info, load_checkpoint, read_manifest, save_checkpoint
from training.config import load_config
from training.dataloader import BucketBatchSampler, close_grammar, oracle_corpus, prepare_instances
from training.train import fit, require_derivable, sweep_dropout, train
from training.trainer import DefaultTrainer
from training.utils import get_optimizer_and_scheduler

TINY_OVERRIDES = [f"model.{key}={value}" for key, value in TINY_SIZES.items()]
CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def tiny_config(tmp_path, *extra):
    return load_config(overrides=TINY_OVERRIDES + [
        "train.max_epochs=2", "train.batch_size=5", "train.dev_beam_size=2", "train.max_steps=60",
        "data.src_freq_cutoff=1", "data.terminal_freq_cutoff=1", f"train.output_dir={tmp_path}",
    ] + list(extra))


def test_config_defaults_and_overrides(tmp_path):
    config = load_config()
    assert config.model.hidden_size == 256
    assert config.train.dtype == "float64"
    path = tmp_path / "run.yaml"
    path.write_text("model:\n  dropout: 0.3\ntrain:\n  lr: 0.01\n", encoding="utf-8")
    config = load_config(str(path), ["train.lr=0.0005"])
    assert config.model.dropout == 0.3
    assert config.train.lr == 0.0005


@pytest.mark.parametrize("overrides", [
    ["model.dropout=0.5"],
    ["model.hidden_size=0"],
    ["train.dtype=float16"],
    ["train.lr_decay=1.5"],
    ["model.no_such_field=1"],
])
def test_config_errors(overrides):
    with pytest.raises(ConfigError):
        load_config(overrides=overrides)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(str(tmp_path / "absent.yaml"))


def test_bucket_sampler_covers_every_index_once():
    lengths = [(ix * 7) % 23 for ix in range(53)]
    sampler = BucketBatchSampler(lengths, batch_size=4, shuffle=True, bucket_factor=3, seed=1)
    batches = list(sampler)
    assert len(batches) == len(sampler)
    assert sorted(ix for batch in batches for ix in batch) == list(range(53))
    assert all(len(batch) <= 4 for batch in batches)
    assert batches == list(BucketBatchSampler(lengths, 4, True, 3, seed=1))


def test_close_grammar_zero_is_identity(minipy_corpus, minipy_grammar):
    assert close_grammar(minipy_corpus, minipy_grammar, 0) is minipy_grammar


def test_training_requires_derivable_examples(tmp_path, minipy_corpus, flowdsl_grammar):
    with pytest.raises(DataError, match="example 3:"):
        require_derivable(Corpus(minipy_corpus[:3], skipped=[(3, "no production")], path="x.jsonl"))
    assert require_derivable(Corpus(minipy_corpus[:2])) is not None
    # the first MiniPy tree is foreign to the FlowDSL grammar
    with pytest.raises(DataError, match="example 0:"):
        oracle_corpus(minipy_corpus[:1], flowdsl_grammar)


def _trainer(tmp_path, corpus, grammar, vocab, model, lr):
    config = tiny_config(tmp_path, f"train.lr={lr}")
    instances = prepare_instances(corpus[:6], grammar, vocab)
    loader = torch.utils.data.DataLoader([i.encoded for i in instances], batch_size=6, collate_fn=make_batch)
    trainer = DefaultTrainer(model, loader, [], grammar, vocab, config, get_optimizer_and_scheduler(model, config))
    return trainer, make_batch([i.encoded for i in instances])


def test_zero_learning_rate_leaves_parameters_unchanged(tmp_path, minipy_corpus, minipy_grammar, minipy_vocab):
    model = make_model(minipy_grammar, minipy_vocab)
    before = copy.deepcopy(model.state_dict())
    trainer, _ = _trainer(tmp_path, minipy_corpus, minipy_grammar, minipy_vocab, model, lr=0.0)
    trainer.train_step(model, epoch=0)
    for name, tensor in model.state_dict().items():
        assert torch.equal(tensor, before[name]), name


def test_one_adam_step_lowers_the_loss(tmp_path, minipy_corpus, minipy_grammar, minipy_vocab):
    model = make_model(minipy_grammar, minipy_vocab)
    trainer, batch = _trainer(tmp_path, minipy_corpus, minipy_grammar, minipy_vocab, model, lr=1e-4)
    with torch.no_grad():
        before = -model(batch).mean().item()
    trainer.train_step(model, epoch=0)
    with torch.no_grad():
        after = -model(batch).mean().item()
    assert after < before


def test_fit_writes_log_and_checkpoint(tmp_path, minipy_corpus, minipy_grammar):
    config = tiny_config(tmp_path, "data.closure_k=1")
    result = fit(minipy_corpus[:20], minipy_corpus[160:165], minipy_grammar, config)
    assert result.grammar.closures
    assert len(result.epoch_log) == 2
    log = pd.read_json(tmp_path / "train_log.jsonl", lines=True)
    assert list(log["epoch"]) == [0, 1]
    assert set(log.columns) == {"epoch", "train_nll", "dev_acc", "dev_bleu", "lr"}
    assert result.checkpoint_path == str(tmp_path / "model.ckpt")
    info = checkpoint_info(result.checkpoint_path)
    assert info["grammar_hash"] == result.grammar.grammar_hash
    assert info["extra"]["train_config"]["data"]["closure_k"] == 1


def test_fit_rejects_an_empty_training_set(tmp_path, minipy_grammar):
    with pytest.raises(DataError):
        fit([], [], minipy_grammar, tiny_config(tmp_path))


def test_checkpoint_round_trip_decodes_identically(tmp_path, minipy_corpus, minipy_grammar, minipy_vocab,
                                                   tiny_model):
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, tiny_model, minipy_grammar, minipy_vocab, extra={"note": "test"})
    model, grammar, vocab = load_checkpoint(path, grammar=minipy_grammar)
    assert grammar.grammar_hash == minipy_grammar.grammar_hash
    assert vocab.vocab_hash == minipy_vocab.vocab_hash
    assert next(model.parameters()).dtype == torch.float32
    assert not model.training

    reference = copy.deepcopy(tiny_model).to(torch.float32)
    inputs = [e.src_tokens for e in minipy_corpus[:10]]
    loaded = decode_corpus(inputs, model, grammar, vocab, beam_size=3, max_steps=60)
    expected = decode_corpus(inputs, reference, minipy_grammar, minipy_vocab, beam_size=3, max_steps=60)
    for a, b in zip(loaded, expected):
        assert a.best.actions == b.best.actions


def test_checkpoint_errors(tmp_path, minipy_grammar, minipy_vocab, flowdsl_grammar, tiny_model):
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, tiny_model, minipy_grammar, minipy_vocab)
    data = path.read_bytes()

    bad = tmp_path / "bad.ckpt"
    bad.write_bytes(b"NOTMAGIC" + data[len(MAGIC):])
    with pytest.raises(CheckpointError, match="magic"):
        load_checkpoint(bad)

    with pytest.raises(CheckpointError, match="grammar hash mismatch"):
        load_checkpoint(path, grammar=flowdsl_grammar)

    bad.write_bytes(data[:-10])
    with pytest.raises(CheckpointError, match="truncated"):
        load_checkpoint(bad)

    manifest, offset = read_manifest(data)
    manifest["version"] = 99
    header = json.dumps(manifest).encode("utf-8")
    bad.write_bytes(MAGIC + HEADER.pack(len(header)) + header + data[offset:])
    with pytest.raises(CheckpointError, match="unsupported checkpoint version"):
        load_checkpoint(bad)

    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "absent.ckpt")


@pytest.mark.slow
def test_overfits_the_small_subset(tmp_path, fixture_dir):
    path = fixture_dir / "minipy_overfit.jsonl"
    config = load_config(str(CONFIG_DIR / "minipy_overfit.yaml"), [
        f"data.train_file={path}", f"data.dev_file={path}", f"train.output_dir={tmp_path}"])
    result = train(config)
    assert result.best_dev_accuracy >= 0.90


@pytest.mark.slow
def test_copy_mechanism_reproduces_unseen_identifiers(tmp_path, fixture_dir, minipy_grammar):
    corpus = load_dataset(fixture_dir / "copy.jsonl", minipy_grammar, "minipy")
    config = load_config(overrides=[
        "model.embed_size=32", "model.node_type_embed_size=16", "model.hidden_size=64",
        "model.encoder_hidden_size=32", "model.scorer_hidden_size=32", "model.dropout=0.0",
        "data.src_freq_cutoff=2", "data.terminal_freq_cutoff=2", "train.max_epochs=200", "train.patience=200",
        "train.dev_beam_size=5", "train.eval_every=5", "train.stop_at_accuracy=1.0",
        f"train.output_dir={tmp_path}",
    ])
    result = fit(corpus, corpus, minipy_grammar, config)
    records = decode_examples(corpus, result.model, result.grammar, result.vocab, beam_size=5, max_steps=60)
    codes = [r["hypotheses"][0]["code"] or "" for r in records]
    assert not any("<unk>" in code for code in codes)
    oov = [next(tok for tok in e.src_tokens if tok.startswith("v") and len(tok) == 6) for e in corpus]
    assert result.best_dev_accuracy == 1.0
    missing = [(e.id, word, code) for e, word, code in zip(corpus, oov, codes) if word not in code]
    assert missing == []


def test_dropout_sweep_keeps_the_best_dev_model(tmp_path, fixture_dir):
    config = tiny_config(tmp_path, "train.max_epochs=1", f"data.train_file={fixture_dir / 'minipy_overfit.jsonl'}",
                         f"data.dev_file={fixture_dir / 'minipy.dev.jsonl'}")
    result = sweep_dropout(config, values=(0.2, 0.0, 0.2))
    assert sorted(result.dev_accuracy) == [0.0, 0.2]
    assert result.dev_accuracy[result.best_dropout] == max(result.dev_accuracy.values())
    assert result.best.model.config.dropout == result.best_dropout
    for p in (0.0, 0.2):
        assert (tmp_path / f"dropout_{p}" / "model.ckpt").exists()
    summary = json.loads((tmp_path / "sweep.json").read_text(encoding="utf-8"))
    assert summary["selected"] == result.best_dropout
    assert summary["checkpoint"] == result.best.checkpoint_path
    assert config.model.dropout == 0.0


def test_dropout_sweep_needs_a_dev_set(tmp_path):
    with pytest.raises(ConfigError, match="dev_file"):
        sweep_dropout(tiny_config(tmp_path), values=(0.0,))
    with pytest.raises(ConfigError):
        sweep_dropout(tiny_config(tmp_path, "data.dev_file=dev.jsonl"), values=())
