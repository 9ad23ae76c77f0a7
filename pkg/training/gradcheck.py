"""
Finite-difference check of the full model on a three-step derivation:
ApplyRule(root -> value:word), GenToken(a), GenToken(</n>). The token `a`
is both a vocabulary word and an input word, so the generation and copy
routes both carry gradient.
"""

import torch

from synforge.data.vocab import SOURCE_SPECIALS, TERMINAL_SPECIALS, Vocab, VocabTable
from synforge.grammar.grammar import load_grammar
from synforge.models.syntax_parser import SyntaxParserConfig, SyntaxParserModel
from synforge.modules.gradcheck import GradcheckReport, finite_difference_check
from synforge.transition.actions import Action

TOY_GRAMMAR = """
type root
type word variable
rule root -> value:word
rule root -> left:word right:word
"""

TOY_SOURCE = ["c", "a", "b"]


def toy_setup(seed: int):
    grammar = load_grammar(TOY_GRAMMAR)
    vocab = Vocab(VocabTable(list(SOURCE_SPECIALS) + ["a", "b", "c"]),
                  VocabTable(list(TERMINAL_SPECIALS) + ["a", "b"]))
    torch.manual_seed(seed)
    config = SyntaxParserConfig.from_grammar(
        grammar, vocab, embed_size=8, node_type_embed_size=4, hidden_size=10, encoder_hidden_size=6,
        scorer_hidden_size=5, dropout=0.0)
    model = SyntaxParserModel(config).to(torch.float64)
    model.eval()
    a = vocab.terminal["a"]
    actions = [Action.apply_rule(0), Action.gen_vocab(a, "a", (TOY_SOURCE.index("a"),)), Action.gen_close()]
    return model, grammar, vocab, actions


def run_gradcheck(seed: int = 1, samples_per_group: int = 6, tolerance: float = 1e-4,
                  eps: float = 1e-5) -> GradcheckReport:
    model, grammar, vocab, actions = toy_setup(seed)
    src_ids = vocab.source.encode(TOY_SOURCE)

    def loss_fn():
        return -model.sequence_log_prob(src_ids, actions, grammar, vocab.terminal)

    generator = torch.Generator().manual_seed(seed)
    return finite_difference_check(loss_fn, model.named_parameters(), eps=eps,
                                   samples_per_group=samples_per_group, tolerance=tolerance,
                                   generator=generator)
