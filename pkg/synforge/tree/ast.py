# -*- coding: utf-8 -*-

from __future__ import annotations

import json
import re
from typing import Iterator, List, Optional

from synforge.errors import AstError
from synforge.grammar.grammar import Grammar, NodeKind, NodeType

KIND_CODES = {NodeKind.NONTERMINAL: "N", NodeKind.VARIABLE: "V", NodeKind.OPERATION: "O"}
CODE_KINDS = {v: k for k, v in KIND_CODES.items()}
ROOT_LABEL = "-"


class AstNode:
    """
    Typed tree node.

    Nonterminals hold `children` (None while unexpanded), variable terminals hold
    `tokens` plus a `closed` flag, operation terminals hold neither and are
    complete as soon as they exist. `created_step` is derivation bookkeeping
    and takes no part in equality or serialization.
    """

    __slots__ = ("type", "label", "children", "tokens", "applied_rule", "closed", "created_step")

    def __init__(
        self,
        type: NodeType,
        label: Optional[str] = None,
        children: Optional[List["AstNode"]] = None,
        tokens: Optional[List[str]] = None,
        applied_rule: Optional[int] = None,
        closed: bool = False,
        created_step: Optional[int] = None,
    ):
        self.type = type
        self.label = label
        self.children = children
        self.tokens = tokens
        self.applied_rule = applied_rule
        self.closed = closed
        self.created_step = created_step
        if type.is_variable:
            if children is not None:
                raise AstError(f"variable terminal '{type.name}' cannot have children")
            if self.tokens is None:
                self.tokens = []
        elif tokens is not None:
            raise AstError(f"'{type.name}' cannot hold tokens")
        if type.is_operation and children is not None:
            raise AstError(f"operation terminal '{type.name}' cannot have children")

    @classmethod
    def nonterminal(cls, type: NodeType, children: List["AstNode"], label: Optional[str] = None,
                    applied_rule: Optional[int] = None) -> "AstNode":
        return cls(type, label=label, children=list(children), applied_rule=applied_rule)

    @classmethod
    def terminal(cls, type: NodeType, tokens: List[str], label: Optional[str] = None) -> "AstNode":
        return cls(type, label=label, tokens=list(tokens), closed=True)

    @classmethod
    def operation(cls, type: NodeType, label: Optional[str] = None) -> "AstNode":
        return cls(type, label=label)

    @property
    def is_expanded(self) -> bool:
        """Whether this node (not its subtree) needs no further action."""
        if self.type.is_nonterminal:
            return self.children is not None
        if self.type.is_variable:
            return self.closed
        return True

    def is_complete(self) -> bool:
        return all(node.is_expanded for node in self.iter_preorder())

    def iter_preorder(self) -> Iterator["AstNode"]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            if node.children:
                stack.extend(reversed(node.children))

    def size(self) -> int:
        return sum(1 for _ in self.iter_preorder())

    def copy(self) -> "AstNode":
        node = AstNode.__new__(AstNode)
        node.type = self.type
        node.label = self.label
        node.children = None if self.children is None else [c.copy() for c in self.children]
        node.tokens = None if self.tokens is None else list(self.tokens)
        node.applied_rule = self.applied_rule
        node.closed = self.closed
        node.created_step = self.created_step
        return node

    def __eq__(self, other) -> bool:
        return isinstance(other, AstNode) and ast_equal(self, other)

    __hash__ = None

    def __repr__(self) -> str:
        if self.type.is_variable:
            return f"AstNode({self.label}:{self.type.name} {self.tokens})"
        n = "?" if self.children is None else len(self.children)
        return f"AstNode({self.label}:{self.type.name} @{self.applied_rule} children={n})"


def ast_equal(a: AstNode, b: AstNode) -> bool:
    """Structural equality over type, applied rule, labels, children and tokens."""
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        if (x.type != y.type or x.label != y.label or x.applied_rule != y.applied_rule
                or x.tokens != y.tokens or x.closed != y.closed):
            return False
        if (x.children is None) != (y.children is None):
            return False
        if x.children is not None:
            if len(x.children) != len(y.children):
                return False
            stack.extend(zip(x.children, y.children))
    return True


def check_invariants(ast: AstNode, grammar: Optional[Grammar] = None) -> None:
    """Raise AstError when a node breaks the tree invariants (optionally against `grammar`)."""
    for node in ast.iter_preorder():
        kind = node.type.kind
        if kind == NodeKind.NONTERMINAL:
            if node.tokens is not None:
                raise AstError(f"nonterminal '{node.type.name}' holds tokens")
            if node.children is not None and grammar is not None:
                if node.applied_rule is None:
                    raise AstError(f"expanded '{node.type.name}' has no applied rule")
                production = grammar.productions[node.applied_rule]
                if production.is_closure:
                    raise AstError(f"'{node.type.name}' records closure production {production.id}")
                if production.head != node.type:
                    raise AstError(f"'{node.type.name}' expanded by '{production}'")
                if len(production.fields) != len(node.children):
                    raise AstError(f"'{node.type.name}' has {len(node.children)} children, "
                                   f"'{production}' needs {len(production.fields)}")
                for field, child in zip(production.fields, node.children):
                    if field.label != child.label or field.type != child.type:
                        raise AstError(f"child {child.label}:{child.type.name} does not match "
                                       f"field {field.label}:{field.type.name} of '{production}'")
        elif kind == NodeKind.VARIABLE:
            if node.children is not None:
                raise AstError(f"variable terminal '{node.type.name}' has children")
            if node.closed and not node.tokens:
                raise AstError(f"closed variable terminal '{node.type.name}' has no tokens")
        elif node.children is not None or node.tokens is not None:
            raise AstError(f"operation terminal '{node.type.name}' holds content")


def bind(ast: AstNode, grammar: Grammar) -> AstNode:
    """Return a copy of `ast` whose nonterminals record the grammar's production ids."""
    ast = ast.copy()
    for node in ast.iter_preorder():
        if node.type.name not in grammar or grammar.node_type(node.type.name) != node.type:
            raise AstError(f"node type '{node.type.name}' is foreign to the grammar")
        if node.type.is_nonterminal:
            if node.children is None:
                raise AstError(f"cannot bind unexpanded '{node.type.name}'")
            production = grammar.lookup(node.type.name, [(c.label, c.type.name) for c in node.children])
            if production is None:
                fields = " ".join(f"{c.label}:{c.type.name}" for c in node.children)
                raise AstError(f"no production '{node.type.name} -> {fields}'")
            node.applied_rule = production.id
    return ast


# ----------------------
# Text format
# ----------------------
LINE = re.compile(
    r"^(?P<indent> *)\((?P<label>[A-Za-z_]\w*|-):(?P<type>[^\s)]+) (?P<kind>[NVO])"
    r"(?: @(?P<rule>\d+))?(?: (?P<tokens>\[.*\]))?(?: (?P<flag>\?|\.\.\.))?(?P<close>\)*)$"
)


def serialize(ast: AstNode) -> str:
    """
    One node per line, two-space indentation, S-expression parentheses:
        (-:root N @0
          (body:stmt* N @3
            (item0:stmt N @5 ?)))
    `?` marks an unexpanded nonterminal, `...` an unclosed variable terminal.
    """
    lines: List[str] = []

    def emit(node: AstNode, depth: int) -> None:
        parts = [f"{'  ' * depth}({node.label or ROOT_LABEL}:{node.type.name} {KIND_CODES[node.type.kind]}"]
        if node.applied_rule is not None:
            parts.append(f" @{node.applied_rule}")
        if node.type.is_variable:
            parts.append(" " + json.dumps(node.tokens, ensure_ascii=False))
            if not node.closed:
                parts.append(" ...")
        elif node.type.is_nonterminal and node.children is None:
            parts.append(" ?")
        lines.append("".join(parts))
        for child in node.children or ():
            emit(child, depth + 1)
        lines[-1] += ")"

    emit(ast, 0)
    return "\n".join(lines) + "\n"


def deserialize(text: str) -> AstNode:
    stack: List[AstNode] = []
    root = None
    lineno = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        match = LINE.match(line)
        if match is None:
            raise AstError("malformed node line", lineno)
        if root is not None and not stack:
            raise AstError("text continues after the root node closed", lineno)
        depth = len(match["indent"])
        if depth != 2 * len(stack):
            raise AstError(f"unexpected indentation {depth}", lineno)
        kind = CODE_KINDS[match["kind"]]
        node_type = NodeType(match["type"], kind)
        label = None if match["label"] == ROOT_LABEL else match["label"]
        flag = match["flag"]
        tokens = None
        if match["tokens"] is not None:
            if kind != NodeKind.VARIABLE:
                raise AstError("only variable terminals carry tokens", lineno)
            try:
                tokens = json.loads(match["tokens"])
            except json.JSONDecodeError as e:
                raise AstError(f"bad token list: {e.msg}", lineno) from None
            if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
                raise AstError("token list must hold strings", lineno)
        elif kind == NodeKind.VARIABLE:
            raise AstError("variable terminal without a token list", lineno)
        if flag == "?" and kind != NodeKind.NONTERMINAL or flag == "..." and kind != NodeKind.VARIABLE:
            raise AstError(f"flag '{flag}' does not apply to this node", lineno)

        node = AstNode(
            node_type,
            label=label,
            children=[] if kind == NodeKind.NONTERMINAL and flag != "?" else None,
            tokens=tokens,
            applied_rule=None if match["rule"] is None else int(match["rule"]),
            closed=kind == NodeKind.VARIABLE and flag != "...",
        )
        if stack:
            parent = stack[-1]
            if parent.children is None:
                raise AstError("unexpanded node cannot have children", lineno)
            parent.children.append(node)
        else:
            root = node
        stack.append(node)
        closes = len(match["close"])
        if closes > len(stack):
            raise AstError("unbalanced ')'", lineno)
        del stack[len(stack) - closes:]
    if root is None:
        raise AstError("empty tree text", lineno or 1)
    if stack:
        raise AstError(f"truncated tree text, {len(stack)} node(s) left open", lineno)
    return root
