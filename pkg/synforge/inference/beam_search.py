# -*- coding: utf-8 -*-

from __future__ import annotations

import heapq
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import torch
from tqdm import tqdm
from transformers.utils import logging

from synforge.grammar.grammar import Grammar
from synforge.models.syntax_parser.batching import action_embed_id
from synforge.models.syntax_parser.modeling_syntax_parser import DecoderStep, SyntaxParserModel
from synforge.transition.actions import CLOSE_ID, UNK_ID, Action, ActionKind
from synforge.transition.system import MAX_TERMINAL_TOKENS, DerivationState, apply_action, initial_state, legal_actions

logger = logging.get_logger(__name__)

DEFAULT_BEAM_SIZE = 15
DEFAULT_MAX_STEPS = 300


@dataclass
class Hypothesis:
    state: DerivationState
    score: float
    step: DecoderStep
    history_h: List[torch.Tensor] = field(default_factory=list)
    history_a: List[torch.Tensor] = field(default_factory=list)

    @property
    def actions(self) -> List[Action]:
        return self.state.history

    @property
    def is_complete(self) -> bool:
        return self.state.is_complete

    def rank_score(self, length_norm: bool = False) -> float:
        if length_norm and self.actions:
            return self.score / len(self.actions)
        return self.score


@dataclass
class DecodeResult:
    """Ranked complete hypotheses, or the best partial one when nothing completed."""
    hypotheses: List[Hypothesis]
    complete: bool

    @property
    def best(self) -> Optional[Hypothesis]:
        return self.hypotheses[0] if self.hypotheses else None


def log_sum_exp(values: Sequence[float]) -> float:
    top = max(values)
    if top == -math.inf:
        return top
    return top + math.log(sum(math.exp(v - top) for v in values))


def _row(step: DecoderStep, ix: int) -> DecoderStep:
    return DecoderStep(step.h[ix:ix + 1], step.c[ix:ix + 1], step.ctx[ix:ix + 1], step.attention[ix:ix + 1])


def _stack(steps: Sequence[DecoderStep]) -> DecoderStep:
    return DecoderStep(*(torch.cat(parts, 0) for parts in zip(*((s.h, s.c, s.ctx, s.attention) for s in steps))))


class BeamSearch:
    """
    Grammar-constrained beam search over derivations of one input.

    Every live hypothesis is expanded by all of its legal actions; GenToken
    routes that append the same surface word (vocabulary row and copied input
    positions) are merged into one candidate whose probability is their sum.
    Complete hypotheses leave the beam for a finished pool, and the live width
    shrinks accordingly. Ties are broken by beam position, then ApplyRule,
    GenClose, GenVocab, GenCopy, then lower id or position.
    """

    def __init__(
        self,
        model: SyntaxParserModel,
        grammar: Grammar,
        vocab,
        beam_size: int = DEFAULT_BEAM_SIZE,
        max_steps: int = DEFAULT_MAX_STEPS,
        max_terminal_tokens: int = MAX_TERMINAL_TOKENS,
        length_norm: bool = False,
    ):
        if beam_size < 1:
            raise ValueError(f"beam size must be >= 1, got {beam_size}")
        if max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {max_steps}")
        self.model = model
        self.grammar = grammar
        self.vocab = vocab
        self.beam_size = beam_size
        self.max_steps = max_steps
        self.max_terminal_tokens = max_terminal_tokens
        self.length_norm = length_norm

    def _candidates(self, hyp: Hypothesis, ix: int, rule_lp: List[float], gen_lp: List[float],
                    copy_lp: List[float], src_tokens: Sequence[str]) -> List[Tuple[float, int, Action]]:
        legal = legal_actions(hyp.state, self.grammar, len(src_tokens), len(self.vocab.terminal),
                              self.max_terminal_tokens)
        out = []
        if hyp.state.frontier.type.is_nonterminal:
            for action in legal:
                out.append((hyp.score + rule_lp[action.arg], ix, action))
            return out

        terminal = self.vocab.terminal
        use_copy = self.model.config.use_copy
        positions: Dict[str, List[int]] = {}
        for pos, token in enumerate(src_tokens):
            positions.setdefault(token, []).append(pos)
        for action in legal:
            if action.kind == ActionKind.CLOSE:
                routes, merged = [gen_lp[CLOSE_ID]], action
            elif action.kind == ActionKind.VOCAB:
                token = terminal.itos[action.arg]
                copies = positions.get(token, []) if use_copy and action.arg != UNK_ID else []
                routes = [gen_lp[action.arg]] + [copy_lp[p] for p in copies]
                merged = Action.gen_vocab(action.arg, token, copies)
            else:
                token = src_tokens[action.arg]
                word_id = terminal.get(token)
                if word_id is not None and word_id not in (CLOSE_ID, UNK_ID):
                    continue
                copies = positions[token]
                if action.arg != copies[0]:
                    continue
                routes = [copy_lp[p] for p in copies]
                merged = Action.gen_copy(action.arg, token, copies)
            score = log_sum_exp(routes)
            if score > -math.inf:
                out.append((hyp.score + score, ix, merged))
        return out

    def _key(self, candidate: Tuple[float, int, Action], lengths: Sequence[int]):
        score, ix, action = candidate
        if self.length_norm:
            score = score / (lengths[ix] + 1)
        return -score, ix, action.sort_key

    @torch.no_grad()
    def search(self, src_tokens: Sequence[str]) -> DecodeResult:
        if len(src_tokens) == 0:
            raise ValueError("cannot decode an empty input")
        model, grammar = self.model, self.grammar
        src_ids = torch.tensor([self.vocab.source.encode(src_tokens)], dtype=torch.long)
        enc = model.encode(src_ids)
        table = model.action_table()
        num_productions = len(grammar)

        live = [Hypothesis(initial_state(grammar), 0.0, model.initial_step(enc))]
        finished: List[Hypothesis] = []
        if live[0].is_complete:
            return DecodeResult(live, True)

        for _ in range(self.max_steps):
            if not live or len(finished) >= self.beam_size:
                break
            L = len(live)
            batch_enc = enc.expand(L)
            prev_actions = torch.stack([h.history_a[-1] if h.history_a else model.start_action for h in live])
            parents = torch.stack([self._parent(h) for h in live])
            types = torch.tensor([grammar.type_index(h.state.frontier.type) for h in live], dtype=torch.long)
            step = model.decoder_step(_stack([h.step for h in live]), prev_actions, parents, types, batch_enc)
            rule_lp = model.rule_log_probs(step.h, types).tolist()
            gen_lp, copy_lp = model.token_log_probs(step.h, step.ctx, batch_enc)
            gen_lp, copy_lp = gen_lp.tolist(), copy_lp.tolist()

            width = self.beam_size - len(finished)
            lengths = [len(h.actions) for h in live]
            pool = []
            for ix, hyp in enumerate(live):
                candidates = self._candidates(hyp, ix, rule_lp[ix], gen_lp[ix], copy_lp[ix], src_tokens)
                pool.extend(heapq.nsmallest(width, candidates, key=lambda c: self._key(c, lengths)))
            pool.sort(key=lambda c: self._key(c, lengths))

            next_live = []
            for score, ix, action in pool[:width]:
                parent = live[ix]
                state = apply_action(parent.state, action, grammar)
                embed = table[action_embed_id(action, self.vocab.terminal, num_productions)]
                hyp = Hypothesis(state, score, _row(step, ix),
                                 parent.history_h + [step.h[ix]], parent.history_a + [embed])
                (finished if hyp.is_complete else next_live).append(hyp)
            live = next_live

        if finished:
            order = sorted(range(len(finished)),
                           key=lambda i: (-finished[i].rank_score(self.length_norm), i))
            return DecodeResult([finished[i] for i in order][:self.beam_size], True)
        logger.warning(f"incomplete decode after {self.max_steps} steps")
        partial = sorted(live, key=lambda h: -h.rank_score(self.length_norm))[:1]
        return DecodeResult(partial, False)

    def _parent(self, hyp: Hypothesis) -> torch.Tensor:
        p = hyp.state.parent_step
        if p < 0:
            size = self.model.config.hidden_size + self.model.config.embed_size
            return self.model.start_action.new_zeros(size)
        return torch.cat([hyp.history_h[p], hyp.history_a[p]], -1)


def beam_search(src_tokens: Sequence[str], model: SyntaxParserModel, grammar: Grammar, vocab,
                beam_size: int = DEFAULT_BEAM_SIZE, max_steps: int = DEFAULT_MAX_STEPS, **kwargs) -> DecodeResult:
    return BeamSearch(model, grammar, vocab, beam_size, max_steps, **kwargs).search(src_tokens)


def greedy_decode(src_tokens: Sequence[str], model: SyntaxParserModel, grammar: Grammar, vocab,
                  max_steps: int = DEFAULT_MAX_STEPS, **kwargs) -> DecodeResult:
    return beam_search(src_tokens, model, grammar, vocab, 1, max_steps, **kwargs)


def num_threads() -> int:
    """Worker cap from SYNFORGE_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("SYNFORGE_THREADS", "1")))
    except ValueError:
        return 1


def decode_corpus(inputs: Sequence[Sequence[str]], model: SyntaxParserModel, grammar: Grammar, vocab,
                  beam_size: int = DEFAULT_BEAM_SIZE, max_steps: int = DEFAULT_MAX_STEPS,
                  workers: Optional[int] = None, show_progress: bool = False, **kwargs) -> List[DecodeResult]:
    """Decode many inputs over a shared read-only model; results follow input order."""
    was_training = model.training
    model.eval()
    search = BeamSearch(model, grammar, vocab, beam_size, max_steps, **kwargs)
    workers = workers or num_threads()
    try:
        if workers == 1:
            iterator = tqdm(inputs, desc="Decoding", disable=not show_progress)
            return [search.search(tokens) for tokens in iterator]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(tqdm(pool.map(search.search, inputs), total=len(inputs), desc="Decoding",
                             disable=not show_progress))
    finally:
        model.train(was_training)
