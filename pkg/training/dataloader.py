# -*- coding: utf-8 -*-

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence

from torch.utils.data import DataLoader, Dataset, Sampler
from tqdm import tqdm
from transformers.utils import logging

from synforge.data.dataset import Example
from synforge.data.vocab import Vocab
from synforge.errors import DataError, OracleError
from synforge.grammar.grammar import Grammar
from synforge.grammar.induction import unary_closure
from synforge.models.syntax_parser import EncodedExample, encode_actions, make_batch
from synforge.transition.actions import Action
from synforge.transition.oracle import oracle_actions

logger = logging.get_logger(__name__)


@dataclass
class TrainingInstance:
    example: Example
    actions: List[Action]
    encoded: EncodedExample


def oracle_corpus(examples: Sequence[Example], grammar: Grammar, vocab: Optional[Vocab] = None) -> List[List[Action]]:
    """Oracle sequences of every example; a non-derivable example is reported with its index."""
    terminal = vocab.terminal if vocab is not None else None
    sequences = []
    for ix, example in enumerate(examples):
        try:
            sequences.append(oracle_actions(example.ast, grammar, terminal, example.src_tokens))
        except OracleError as e:
            raise DataError(f"{example.id!r} is not derivable: {e}", index=ix) from None
    return sequences


def close_grammar(examples: Sequence[Example], grammar: Grammar, k: int) -> Grammar:
    """Add unary closures for chains seen at least `k` times; `k == 0` leaves the grammar unchanged."""
    if k == 0:
        return grammar
    return unary_closure(grammar, oracle_corpus(examples, grammar), k)


def prepare_instances(examples: Sequence[Example], grammar: Grammar, vocab: Vocab,
                      use_copy: bool = True) -> List[TrainingInstance]:
    sequences = oracle_corpus(examples, grammar, vocab)
    instances = []
    for example, actions in tqdm(list(zip(examples, sequences)), desc="Encoding oracle sequences", leave=False):
        src_ids = vocab.source.encode(example.src_tokens)
        instances.append(TrainingInstance(example, actions,
                                          encode_actions(src_ids, actions, grammar, vocab.terminal, use_copy)))
    return instances


class ActionDataset(Dataset):

    def __init__(self, instances: Sequence[TrainingInstance]):
        self.instances = list(instances)

    def __getitem__(self, idx) -> EncodedExample:
        return self.instances[idx].encoded

    def __len__(self):
        return len(self.instances)

    def lengths(self) -> List[int]:
        return [len(instance.encoded) for instance in self.instances]


class BucketBatchSampler(Sampler):
    """
    Batches of examples with similar oracle length. Examples are sorted by
    length within shuffled windows of `batch_size * bucket_factor`, cut into
    batches, and the batches are shuffled.
    """

    def __init__(self, lengths: Sequence[int], batch_size: int, shuffle: bool = True,
                 bucket_factor: int = 10, seed: int = 0):
        self.lengths = list(lengths)
        self.batch_size = batch_size
        self.shuffle = shuffle
        self.bucket_factor = bucket_factor
        self.rng = random.Random(seed)

    def __iter__(self) -> Iterator[List[int]]:
        order = list(range(len(self.lengths)))
        if self.shuffle:
            self.rng.shuffle(order)
        window = self.batch_size * self.bucket_factor
        batches = []
        for start in range(0, len(order), window):
            chunk = sorted(order[start:start + window], key=lambda ix: self.lengths[ix])
            batches.extend(chunk[i:i + self.batch_size] for i in range(0, len(chunk), self.batch_size))
        if self.shuffle:
            self.rng.shuffle(batches)
        return iter(batches)

    def __len__(self):
        return (len(self.lengths) + self.batch_size - 1) // self.batch_size


def get_action_loader(instances: Sequence[TrainingInstance], batch_size: int, shuffle: bool = True,
                      seed: int = 0) -> DataLoader:
    dataset = ActionDataset(instances)
    sampler = BucketBatchSampler(dataset.lengths(), batch_size, shuffle=shuffle, seed=seed)
    return DataLoader(dataset, batch_sampler=sampler, collate_fn=make_batch, num_workers=0)
