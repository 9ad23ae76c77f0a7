# -*- coding: utf-8 -*-

from typing import List, Optional

from transformers.configuration_utils import PretrainedConfig


class SyntaxParserConfig(PretrainedConfig):

    model_type = 'syntax_parser'

    def __init__(
        self,
        # grammar / vocabulary sizes
        src_vocab_size: int = 2,
        terminal_vocab_size: int = 2,
        num_productions: int = 1,
        num_node_types: int = 1,
        production_heads: Optional[List[int]] = None,
        # dimensions
        embed_size: int = 128,
        node_type_embed_size: int = 64,
        hidden_size: int = 256,
        encoder_hidden_size: int = 128,
        scorer_hidden_size: int = 50,
        dropout: float = 0.0,
        init_scale: float = 0.08,
        # ablations
        use_parent_feeding: bool = True,
        use_frontier_embedding: bool = True,
        use_copy: bool = True,
        mask_rule_softmax: bool = False,
        **kwargs
    ):
        self.src_vocab_size = src_vocab_size
        self.terminal_vocab_size = terminal_vocab_size
        self.num_productions = num_productions
        self.num_node_types = num_node_types
        self.production_heads = list(production_heads) if production_heads is not None else [0] * num_productions
        self.embed_size = embed_size
        self.node_type_embed_size = node_type_embed_size
        self.hidden_size = hidden_size
        self.encoder_hidden_size = encoder_hidden_size
        self.scorer_hidden_size = scorer_hidden_size
        self.dropout = dropout
        self.init_scale = init_scale
        self.use_parent_feeding = use_parent_feeding
        self.use_frontier_embedding = use_frontier_embedding
        self.use_copy = use_copy
        self.mask_rule_softmax = mask_rule_softmax

        for name in ('src_vocab_size', 'num_productions', 'num_node_types', 'embed_size',
                     'node_type_embed_size', 'hidden_size', 'encoder_hidden_size', 'scorer_hidden_size'):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if terminal_vocab_size < 2:
            raise ValueError("terminal vocabulary needs at least the close and unknown rows")
        if len(self.production_heads) != num_productions:
            raise ValueError(f"production_heads lists {len(self.production_heads)} heads "
                             f"for {num_productions} productions")
        if not 0.0 <= dropout < 1.0:
            raise ValueError(f"dropout must be in [0, 1), got {dropout}")

        kwargs.setdefault('tie_word_embeddings', False)
        super().__init__(**kwargs)

    @classmethod
    def from_grammar(cls, grammar, vocab, **kwargs) -> "SyntaxParserConfig":
        """Size a config for `grammar` and the source/terminal tables of `vocab`."""
        return cls(
            src_vocab_size=len(vocab.source),
            terminal_vocab_size=len(vocab.terminal),
            num_productions=len(grammar),
            num_node_types=len(grammar.node_types),
            production_heads=[grammar.type_index(p.head) for p in grammar.productions],
            **kwargs,
        )

    @property
    def decoder_input_size(self) -> int:
        # [a_{t-1} : c_{t-1} : (s_p : a_p) : n_f]
        context = 2 * self.encoder_hidden_size
        return self.embed_size + context + self.hidden_size + self.embed_size + self.node_type_embed_size
