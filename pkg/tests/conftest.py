from pathlib import Path

import pytest
import torch

from synforge.data.dataset import Corpus, load_dataset
from synforge.data.vocab import build_vocab
from synforge.lang import language_grammar
from synforge.models.syntax_parser import SyntaxParserConfig, SyntaxParserModel
from synforge.tree.ast import AstNode

TINY_SIZES = dict(embed_size=16, node_type_embed_size=8, hidden_size=24, encoder_hidden_size=12,
                  scorer_hidden_size=10, dropout=0.0)
DATA_DIR = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(scope="session")
def fixture_dir():
    return DATA_DIR


@pytest.fixture(scope="session")
def minipy_grammar():
    return language_grammar("minipy")


@pytest.fixture(scope="session")
def flowdsl_grammar():
    return language_grammar("flowdsl")


def _load_splits(fixture_dir, language):
    grammar = language_grammar(language)
    corpus = Corpus()
    for split in ("train", "dev", "test"):
        part = load_dataset(fixture_dir / f"{language}.{split}.jsonl", grammar, language)
        assert part.skipped == []
        corpus.extend(part)
    return corpus


@pytest.fixture(scope="session")
def minipy_corpus(fixture_dir):
    return _load_splits(fixture_dir, "minipy")


@pytest.fixture(scope="session")
def flowdsl_corpus(fixture_dir):
    return _load_splits(fixture_dir, "flowdsl")


@pytest.fixture(scope="session")
def minipy_vocab(minipy_corpus):
    return build_vocab(minipy_corpus, 3, 3)


def make_model(grammar, vocab, seed=0, dtype=torch.float64, **kwargs):
    sizes = dict(TINY_SIZES, **kwargs)
    torch.manual_seed(seed)
    model = SyntaxParserModel(SyntaxParserConfig.from_grammar(grammar, vocab, **sizes)).to(dtype)
    model.eval()
    return model


@pytest.fixture
def tiny_model(minipy_grammar, minipy_vocab):
    return make_model(minipy_grammar, minipy_vocab)


def _min_heights(grammar):
    """Smallest derivation height below every node type."""
    heights = {t.name: 0 for t in grammar.node_types if not t.is_nonterminal}
    changed = True
    while changed:
        changed = False
        for production in grammar.productions:
            if production.is_closure or any(f.type.name not in heights for f in production.fields):
                continue
            height = 1 + max((heights[f.type.name] for f in production.fields), default=0)
            if height < heights.get(production.head.name, float("inf")):
                heights[production.head.name] = height
                changed = True
    return heights


def sample_tree(grammar, rng, words, max_depth=7):
    """A random complete, bound tree of `grammar` whose terminals draw 1-3 tokens from `words`."""
    heights = _min_heights(grammar)

    def cost(production):
        return max((heights[f.type.name] for f in production.fields), default=0)

    def expand(node_type, label, depth):
        if node_type.is_variable:
            return AstNode.terminal(node_type, [rng.choice(words) for _ in range(rng.randint(1, 3))], label=label)
        if node_type.is_operation:
            return AstNode.operation(node_type, label=label)
        options = [p for p in grammar.rules_for(node_type) if not p.is_closure]
        if depth >= max_depth:
            least = min(cost(p) for p in options)
            options = [p for p in options if cost(p) == least]
        production = rng.choice(options)
        children = [expand(f.type, f.label, depth + 1) for f in production.fields]
        return AstNode.nonterminal(node_type, children, label=label, applied_rule=production.id)

    return expand(grammar.root_type, None, 0)
