import pytest

from synforge.errors import AstError
from synforge.grammar import NodeKind, NodeType, load_grammar
from synforge.lang import language_grammar, parse
from synforge.tree.ast import AstNode, bind, check_invariants, deserialize, serialize

GRAMMAR = load_grammar("""
type root
type pair
type word variable
rule root -> body:pair
rule pair -> left:word right:word
""")
ROOT, PAIR, WORD = (GRAMMAR.node_type(n) for n in ("root", "pair", "word"))


def pair_tree(left, right):
    pair = AstNode.nonterminal(PAIR, [AstNode.terminal(WORD, left, label="left"),
                                      AstNode.terminal(WORD, right, label="right")], label="body")
    return AstNode.nonterminal(ROOT, [pair])


def test_bind_records_production_ids():
    tree = bind(pair_tree(["a"], ["b", "c"]), GRAMMAR)
    assert tree.applied_rule == 0
    assert tree.children[0].applied_rule == 1
    check_invariants(tree, GRAMMAR)
    assert tree.size() == 4
    assert tree.is_complete()


def test_bind_does_not_touch_its_input():
    raw = pair_tree(["a"], ["b"])
    bind(raw, GRAMMAR)
    assert raw.applied_rule is None


def test_bind_rejects_underivable_tree():
    tree = AstNode.nonterminal(ROOT, [AstNode.terminal(WORD, ["a"], label="body")])
    with pytest.raises(AstError, match="no production"):
        bind(tree, GRAMMAR)


def test_equality_ignores_creation_step():
    a, b = pair_tree(["a"], ["b"]), pair_tree(["a"], ["b"])
    b.children[0].created_step = 7
    assert a == b
    assert a != pair_tree(["a"], ["c"])
    assert a != bind(a, GRAMMAR)


def test_node_kind_constraints():
    with pytest.raises(AstError):
        AstNode(WORD, children=[])
    with pytest.raises(AstError):
        AstNode(PAIR, tokens=["x"])
    with pytest.raises(AstError):
        AstNode(NodeType("Add", NodeKind.OPERATION), children=[])


def test_invariants_catch_closed_empty_terminal():
    tree = pair_tree(["a"], ["b"])
    tree.children[0].children[1].tokens = []
    with pytest.raises(AstError, match="no tokens"):
        check_invariants(tree)


def test_invariants_catch_field_mismatch():
    tree = bind(pair_tree(["a"], ["b"]), GRAMMAR)
    tree.children[0].children[0].label = "other"
    with pytest.raises(AstError, match="does not match"):
        check_invariants(tree, GRAMMAR)


def test_partial_tree_is_incomplete():
    tree = AstNode.nonterminal(ROOT, [AstNode(PAIR, label="body")])
    assert not tree.is_complete()
    assert not tree.children[0].is_expanded


def test_text_form_round_trip():
    tree = bind(parse("if flag:\n    items.append(x)\nelse:\n    total = (x + 3)", "minipy"),
                language_grammar("minipy"))
    text = serialize(tree)
    assert deserialize(text) == tree
    assert text.startswith("(-:root N @0\n")


def test_text_form_marks_partial_nodes():
    tree = AstNode.nonterminal(ROOT, [AstNode(PAIR, label="body")])
    assert serialize(tree) == "(-:root N\n  (body:pair N ?))\n"
    open_word = AstNode(WORD, label="left", tokens=["x"])
    assert serialize(open_word) == '(left:word V ["x"] ...)\n'
    assert deserialize(serialize(tree)) == tree


@pytest.mark.parametrize("text, line", [
    ("(-:root N\n  (body:pair N ?)\n", 2),
    ("(-:root N\n    (body:pair N ?))\n", 2),
    ("(-:root N)\n(-:root N)\n", 2),
    ("root\n", 1),
    ("(-:word V [1])\n", 1),
])
def test_malformed_text_reports_line(text, line):
    with pytest.raises(AstError) as info:
        deserialize(text)
    assert info.value.line == line


def test_text_form_is_stable_over_every_fixture_tree(minipy_corpus, flowdsl_corpus):
    examples = list(minipy_corpus) + list(flowdsl_corpus)
    assert len(examples) == 300
    for example in examples:
        text = serialize(example.ast)
        tree = deserialize(text)
        assert tree == example.ast, example.id
        assert serialize(tree).encode("utf-8") == text.encode("utf-8"), example.id
