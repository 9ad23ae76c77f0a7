import copy
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from transformers.utils import logging

from synforge.data.dataset import Corpus, Example, load_dataset
from synforge.data.vocab import Vocab, build_vocab
from synforge.errors import ConfigError, DataError
from synforge.grammar.grammar import Grammar, load_grammar_file
from synforge.lang import language_grammar
from synforge.models.syntax_parser import SyntaxParserConfig, SyntaxParserModel
from training.config import DROPOUT_CHOICES, TrainConfig, validate_config
from training.dataloader import close_grammar, get_action_loader, prepare_instances
from training.trainer import DefaultTrainer
from training.utils import count_model_params, get_optimizer_and_scheduler, set_random_seed

logger = logging.get_logger(__name__)


@dataclass
class TrainResult:
    model: SyntaxParserModel
    grammar: Grammar
    vocab: Vocab
    epoch_log: List[dict]
    best_dev_accuracy: Optional[float]
    checkpoint_path: Optional[str]


def load_base_grammar(config: TrainConfig) -> Grammar:
    if config.data.grammar:
        return load_grammar_file(config.data.grammar)
    return language_grammar(config.data.language)


def require_derivable(corpus: Corpus) -> Corpus:
    if corpus.skipped:
        ix, reason = corpus.skipped[0]
        raise DataError(f"training example is not derivable: {reason} "
                        f"({len(corpus.skipped)} such example(s) in {corpus.path})", index=ix)
    return corpus


def build_model(grammar: Grammar, vocab: Vocab, config: TrainConfig) -> SyntaxParserModel:
    model_config = SyntaxParserConfig.from_grammar(grammar, vocab, **vars(config.model))
    model = SyntaxParserModel(model_config).to(config.torch_dtype)

    trainable_params = count_model_params(model, requires_grad=True)
    total_params = count_model_params(model, requires_grad=False)
    logger.info(f"Model trainable params: {trainable_params}")
    logger.info(f"Model total params: {total_params}")
    return model


def fit(train_examples: Sequence[Example], dev_examples: Sequence[Example], grammar: Grammar,
        config: TrainConfig) -> TrainResult:
    """Train on in-memory examples already bound to `grammar` (before closure)."""
    if len(train_examples) == 0:
        raise DataError("empty training set")
    set_random_seed(config.train.seed)

    grammar = close_grammar(train_examples, grammar, config.data.closure_k)
    vocab = build_vocab(train_examples, config.data.src_freq_cutoff, config.data.terminal_freq_cutoff)
    model = build_model(grammar, vocab, config)

    logger.info("Preparing data...")
    instances = prepare_instances(train_examples, grammar, vocab, use_copy=config.model.use_copy)
    train_loader = get_action_loader(instances, config.train.batch_size, shuffle=True, seed=config.train.seed)

    logger.info("Building trainer...")
    trainer = DefaultTrainer(
        model=model,
        train_loader=train_loader,
        dev_examples=dev_examples,
        grammar=grammar,
        vocab=vocab,
        config=config,
        optimizers=get_optimizer_and_scheduler(model, config),
    )

    logger.info("Train start")
    best_model = trainer.train()
    logger.info("Train over")
    best = trainer.best_val_metric if trainer.best_val_metric >= 0 else None
    return TrainResult(best_model, grammar, vocab, trainer.epoch_log, best, trainer.best_checkpoint_path)


def train(config: TrainConfig) -> TrainResult:
    if not config.data.train_file:
        raise ConfigError("data.train_file is required for training")
    grammar = load_base_grammar(config)
    language = config.data.language
    train_set = require_derivable(load_dataset(config.data.train_file, grammar, language))
    dev_set = load_dataset(config.data.dev_file, grammar, language) if config.data.dev_file else []
    return fit(train_set, dev_set, grammar, config)


@dataclass
class SweepResult:
    best: TrainResult
    best_dropout: float
    dev_accuracy: Dict[float, float]


def sweep_dropout(config: TrainConfig, values: Sequence[float] = DROPOUT_CHOICES) -> SweepResult:
    """
    Train one model per dropout rate, each under `<output_dir>/dropout_<p>`, and
    keep the one with the best dev exact match (the lower rate on ties).
    `<output_dir>/sweep.json` records every rate's dev accuracy and the choice.
    """
    if not config.data.dev_file:
        raise ConfigError("data.dev_file is required to select a dropout rate")
    if not values:
        raise ConfigError("no dropout rates to sweep")
    root = Path(config.train.output_dir)
    accuracy: Dict[float, float] = {}
    best: Optional[Tuple[float, TrainResult]] = None
    for p in sorted(set(values)):
        run_config = copy.deepcopy(config)
        run_config.model.dropout = p
        run_config.train.output_dir = str(root / f"dropout_{p}")
        validate_config(run_config)
        logger.info(f"Dropout sweep: training with p={p}")
        result = train(run_config)
        accuracy[p] = result.best_dev_accuracy if result.best_dev_accuracy is not None else 0.0
        if best is None or accuracy[p] > accuracy[best[0]]:
            best = (p, result)
    p, result = best
    logger.info(f"Dropout sweep: selected p={p} (dev acc {accuracy[p]:.4f})")
    root.mkdir(parents=True, exist_ok=True)
    summary = {"dev_accuracy": {str(k): v for k, v in accuracy.items()}, "selected": p,
               "checkpoint": result.checkpoint_path}
    with open(root / "sweep.json", "w", encoding="utf-8") as f:
        json.dump(summary, f, indent=2)
    return SweepResult(result, p, accuracy)
