# -*- coding: utf-8 -*-

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Mapping, Optional, Sequence, Tuple

import torch
import torch.nn as nn
import torch.nn.functional as F
from torch.nn.utils.rnn import pack_padded_sequence, pad_packed_sequence
from transformers.modeling_utils import PreTrainedModel
from transformers.utils import logging

from synforge.errors import TrainingError
from synforge.grammar.grammar import Grammar
from synforge.models.syntax_parser.batching import ActionBatch, encode_actions, make_batch
from synforge.models.syntax_parser.configuration_syntax_parser import SyntaxParserConfig
from synforge.modules.dropout import VariationalDropout, dropout
from synforge.modules.lstm import init_recurrent_, lstm_step, zero_state
from synforge.modules.mlp import Mlp1
from synforge.modules.ops import log_softmax, softmax
from synforge.transition.actions import Action

logger = logging.get_logger(__name__)

# finite stand-in for log(0) on routes that do not exist
NEG = -1e4


@dataclass
class EncoderOutput:
    states: torch.Tensor               # (B, N, 2 * encoder_hidden_size)
    mask: torch.Tensor                 # (B, N) bool
    oov: Optional[torch.Tensor] = None  # (B, N) bool

    def expand(self, batch_size: int) -> "EncoderOutput":
        """Repeat a single encoded input for `batch_size` hypotheses."""
        if self.states.shape[0] != 1:
            raise ValueError("only a single encoded input can be expanded")
        oov = None if self.oov is None else self.oov.expand(batch_size, -1)
        return EncoderOutput(self.states.expand(batch_size, -1, -1), self.mask.expand(batch_size, -1), oov)


@dataclass
class DecoderStep:
    h: torch.Tensor          # (B, hidden_size)
    c: torch.Tensor          # (B, hidden_size)
    ctx: torch.Tensor        # (B, 2 * encoder_hidden_size), read with the previous h; LSTM input and token heads
    attention: torch.Tensor  # (B, N)


class SyntaxParserPreTrainedModel(PreTrainedModel):

    config_class = SyntaxParserConfig
    base_model_prefix = 'syntax_parser'

    def _init_weights(self, module):
        scale = self.config.init_scale
        if isinstance(module, (nn.LSTM, nn.LSTMCell)):
            init_recurrent_(module, scale)
        elif isinstance(module, nn.Linear):
            nn.init.xavier_uniform_(module.weight)
            if module.bias is not None:
                nn.init.zeros_(module.bias)
        elif isinstance(module, nn.Embedding):
            nn.init.uniform_(module.weight, -scale, scale)
        elif isinstance(module, SyntaxParserModel):
            module.reset_action_parameters()


class SyntaxParserModel(SyntaxParserPreTrainedModel):
    """
    Encoder-decoder over grammar actions.

    A bidirectional LSTM reads the description. The decoder LSTM consumes
    [a_{t-1} : c_t : p_t : n_{f_t}] where c_t is the attention read with
    s_{t-1}, p_t is the hidden state and action embedding of the step that
    created the frontier node (parent feeding) and n_{f_t} is the frontier
    node-type embedding. ApplyRule scores are W_R tanh(W s_t); GenToken mixes a
    vocabulary softmax over W_G, fed with [s_t : c_t], and a pointer over input
    positions through a gen/copy selector.

    Training applies standard dropout to the source embeddings and to s_t
    before the heads, and a variational mask to the decoder input.
    """

    def __init__(self, config: SyntaxParserConfig):
        super().__init__(config)
        E, H = config.embed_size, config.hidden_size
        D = 2 * config.encoder_hidden_size

        self.src_embed = nn.Embedding(config.src_vocab_size, E)
        self.encoder = nn.LSTM(E, config.encoder_hidden_size, batch_first=True, bidirectional=True)

        # W_R doubles as the ApplyRule action embedding, W_G as the GenToken one
        self.production_embed = nn.Parameter(torch.empty(config.num_productions, E))
        self.token_embed = nn.Parameter(torch.empty(config.terminal_vocab_size, E))
        self.start_action = nn.Parameter(torch.empty(E))
        self.rule_bias = nn.Parameter(torch.zeros(config.num_productions))
        self.token_bias = nn.Parameter(torch.zeros(config.terminal_vocab_size))
        self.node_type_embed = nn.Embedding(config.num_node_types, config.node_type_embed_size)

        self.decoder = nn.LSTMCell(config.decoder_input_size, H)
        self.dropout = VariationalDropout(config.dropout)
        self.attention = Mlp1((D, H), config.scorer_hidden_size)
        self.rule_proj = nn.Linear(H, E)
        self.token_proj = nn.Linear(H + D, E)
        self.selector = nn.Linear(H, 2)
        self.pointer = Mlp1((D, H, D), config.scorer_hidden_size)

        heads = torch.zeros(config.num_node_types, config.num_productions, dtype=torch.bool)
        for rule, head in enumerate(config.production_heads):
            heads[head, rule] = True
        self.register_buffer('rule_heads', heads, persistent=False)

        self.reset_action_parameters()
        self.post_init()

    def reset_action_parameters(self):
        scale = self.config.init_scale
        with torch.no_grad():
            for param in (self.production_embed, self.token_embed, self.start_action):
                nn.init.uniform_(param, -scale, scale)
            nn.init.zeros_(self.rule_bias)
            nn.init.zeros_(self.token_bias)

    # ----------------------
    # Encoder / attention
    # ----------------------
    def encode(self, src_ids: torch.Tensor, src_mask: Optional[torch.Tensor] = None,
               oov: Optional[torch.Tensor] = None) -> EncoderOutput:
        if src_ids.dim() == 1:
            src_ids = src_ids.unsqueeze(0)
        if src_ids.shape[-1] == 0:
            raise ValueError("cannot encode an empty input")
        if src_mask is None:
            src_mask = torch.ones_like(src_ids, dtype=torch.bool)
        lengths = src_mask.sum(-1)
        if (lengths == 0).any():
            raise ValueError("cannot encode an empty input")
        embedded = dropout(self.src_embed(src_ids), self.config.dropout, self.training)
        packed = pack_padded_sequence(embedded, lengths.cpu(), batch_first=True, enforce_sorted=False)
        outputs, _ = self.encoder(packed)
        states, _ = pad_packed_sequence(outputs, batch_first=True, total_length=src_ids.shape[1])
        return EncoderOutput(states, src_mask, oov)

    def attend(self, h: torch.Tensor, enc: EncoderOutput) -> Tuple[torch.Tensor, torch.Tensor]:
        """Attention weights over input positions and the context vector they read."""
        scores = self.attention(enc.states, h.unsqueeze(1))
        weights = softmax(scores, enc.mask)
        ctx = torch.bmm(weights.unsqueeze(1), enc.states).squeeze(1)
        return weights, ctx

    # ----------------------
    # Decoder
    # ----------------------
    def action_table(self) -> torch.Tensor:
        return torch.cat([self.production_embed, self.token_embed], 0)

    def start_vector(self, batch_size: int) -> torch.Tensor:
        return self.start_action.unsqueeze(0).expand(batch_size, -1)

    def initial_step(self, enc: EncoderOutput) -> DecoderStep:
        B = enc.states.shape[0]
        h, c = zero_state(B, self.config.hidden_size, like=enc.states)
        weights, ctx = self.attend(h, enc)
        return DecoderStep(h, c, ctx, weights)

    def parent_vector(self, history_h: Sequence[torch.Tensor], history_a: torch.Tensor,
                      parents: torch.Tensor) -> torch.Tensor:
        """[s_p : a_p] for each row, zeros where the parent step is -1."""
        B = parents.shape[0]
        size = self.config.hidden_size + self.config.embed_size
        if len(history_h) == 0:
            return history_a.new_zeros(B, size)
        stacked = torch.stack(list(history_h), 1)
        rows = torch.arange(B, device=parents.device)
        index = parents.clamp(min=0)
        vector = torch.cat([stacked[rows, index], history_a[rows, index]], -1)
        return vector.masked_fill((parents < 0).unsqueeze(-1), 0.0)

    def decoder_step(
        self,
        prev: DecoderStep,
        prev_action: torch.Tensor,
        parent: torch.Tensor,
        frontier_types: torch.Tensor,
        enc: EncoderOutput,
        dropout_mask: Optional[torch.Tensor] = None,
    ) -> DecoderStep:
        if ((frontier_types < 0) | (frontier_types >= self.config.num_node_types)).any():
            raise ValueError(f"unknown node type index in {frontier_types.tolist()}")
        node = self.node_type_embed(frontier_types)
        if not self.config.use_frontier_embedding:
            node = torch.zeros_like(node)
        if not self.config.use_parent_feeding:
            parent = torch.zeros_like(parent)
        weights, ctx = self.attend(prev.h, enc)
        x = torch.cat([prev_action, ctx, parent, node], -1)
        x = VariationalDropout.apply_mask(x, dropout_mask)
        h, c = lstm_step(self.decoder, x, (prev.h, prev.c))
        return DecoderStep(h, c, ctx, weights)

    # ----------------------
    # Heads
    # ----------------------
    def rule_log_probs(self, h: torch.Tensor, frontier_types: Optional[torch.Tensor] = None) -> torch.Tensor:
        logits = F.linear(torch.tanh(self.rule_proj(h)), self.production_embed, self.rule_bias)
        if not self.config.mask_rule_softmax or frontier_types is None:
            return log_softmax(logits)
        legal = self.rule_heads[frontier_types]
        legal = legal | ~legal.any(-1, keepdim=True)
        return log_softmax(logits, legal)

    def token_log_probs(self, h: torch.Tensor, ctx: torch.Tensor,
                        enc: EncoderOutput) -> Tuple[torch.Tensor, torch.Tensor]:
        """
        Route log-probabilities of GenToken: (B, V) for generating each word and
        (B, N) for copying each input position, jointly normalized.
        """
        logits = F.linear(torch.tanh(self.token_proj(torch.cat([h, ctx], -1))), self.token_embed, self.token_bias)
        gen = log_softmax(logits)
        if not self.config.use_copy:
            return gen, torch.full_like(enc.mask, float('-inf'), dtype=gen.dtype)
        select = log_softmax(self.selector(h))
        pointer = self.pointer(enc.states, h.unsqueeze(1), ctx.unsqueeze(1))
        copy = log_softmax(pointer, enc.mask) + select[:, 1:]
        return gen + select[:, :1], copy

    def apply_rule_dist(self, h: torch.Tensor, frontier_types: Optional[torch.Tensor] = None) -> torch.Tensor:
        return self.rule_log_probs(h, frontier_types).exp()

    def gen_token_dist(self, h: torch.Tensor, ctx: torch.Tensor, enc: EncoderOutput) -> torch.Tensor:
        """Probabilities over vocabulary words followed by input positions."""
        gen, copy = self.token_log_probs(h, ctx, enc)
        return torch.cat([gen, copy], -1).exp()

    def gold_log_prob(self, step: DecoderStep, enc: EncoderOutput, batch: ActionBatch, t: int) -> torch.Tensor:
        h = dropout(step.h, self.config.dropout, self.training)
        rule = self.rule_log_probs(h, batch.frontier_types[:, t])
        rule = rule.gather(1, batch.rule_ids[:, t:t + 1]).squeeze(1)
        gen, copy = self.token_log_probs(h, step.ctx, enc)
        gen_ids = batch.gen_ids[:, t]
        gen_route = gen.gather(1, gen_ids.clamp(min=0).unsqueeze(1)).masked_fill((gen_ids < 0).unsqueeze(1), NEG)
        copy_route = copy.masked_fill(~batch.copy_mask[:, t], NEG)
        token = torch.logsumexp(torch.cat([gen_route, copy_route], -1), -1)
        return torch.where(batch.is_rule[:, t], rule, token)

    def forward(self, batch: ActionBatch) -> torch.Tensor:
        """Log-probability of every oracle sequence in the batch, shape (B,)."""
        enc = self.encode(batch.src_ids, batch.src_mask)
        B, T = batch.batch_size, batch.num_steps
        actions = F.embedding(batch.action_ids, self.action_table())
        mask = self.dropout.sample_mask(B, self.config.decoder_input_size, like=enc.states)
        step = self.initial_step(enc)
        history: List[torch.Tensor] = []
        total = enc.states.new_zeros(B)
        for t in range(T):
            prev = self.start_vector(B) if t == 0 else actions[:, t - 1]
            parent = self.parent_vector(history, actions[:, :t], batch.parent_steps[:, t])
            step = self.decoder_step(step, prev, parent, batch.frontier_types[:, t], enc, mask)
            history.append(step.h)
            log_prob = self.gold_log_prob(step, enc, batch, t)
            live = batch.step_mask[:, t]
            if bool(((log_prob <= NEG / 2) & live).any()):
                rows = ((log_prob <= NEG / 2) & live).nonzero().flatten().tolist()
                raise TrainingError(f"zero-probability gold action at step {t} of batch rows {rows}")
            total = total + log_prob.masked_fill(~live, 0.0)
        return total

    def sequence_log_prob(self, src_ids: Sequence[int], actions: Sequence[Action], grammar: Grammar,
                          terminal: Mapping[str, int]) -> torch.Tensor:
        example = encode_actions(src_ids, actions, grammar, terminal, use_copy=self.config.use_copy)
        return self.forward(make_batch([example]))[0]
