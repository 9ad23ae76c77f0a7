# -*- coding: utf-8 -*-

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from transformers.utils import logging

from synforge.errors import GrammarError

logger = logging.get_logger(__name__)

TYPE_NAME = re.compile(r"[A-Za-z_][\w.]*\*?$")
LABEL_NAME = re.compile(r"[A-Za-z_]\w*$")


class NodeKind(str, Enum):
    NONTERMINAL = "nonterminal"
    VARIABLE = "variable_terminal"
    OPERATION = "operation_terminal"


# keyword used in grammar files -> kind
KIND_KEYWORDS = {
    "variable": NodeKind.VARIABLE,
    "terminal": NodeKind.VARIABLE,
    "op": NodeKind.OPERATION,
}


@dataclass(frozen=True)
class NodeType:
    name: str
    kind: NodeKind = NodeKind.NONTERMINAL

    @property
    def is_nonterminal(self) -> bool:
        return self.kind == NodeKind.NONTERMINAL

    @property
    def is_variable(self) -> bool:
        return self.kind == NodeKind.VARIABLE

    @property
    def is_operation(self) -> bool:
        return self.kind == NodeKind.OPERATION

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Field:
    label: str
    type: NodeType


Signature = Tuple[str, Tuple[Tuple[str, str], ...]]


@dataclass(frozen=True)
class Production:
    id: int
    head: NodeType
    fields: Tuple[Field, ...]
    closure_chain: Optional[Tuple[int, ...]] = None

    @property
    def is_closure(self) -> bool:
        return self.closure_chain is not None

    @property
    def signature(self) -> Signature:
        return signature_of(self.head.name, [(f.label, f.type.name) for f in self.fields])

    def __str__(self) -> str:
        arrow = "->*" if self.is_closure else "->"
        rhs = " ".join(f"{f.label}:{f.type.name}" for f in self.fields)
        return f"{self.head.name} {arrow} {rhs}".rstrip()


def signature_of(head: str, fields: Iterable[Tuple[str, str]]) -> Signature:
    return head, tuple(fields)


class Grammar:
    """
    Node-type inventory plus ordered productions. Immutable once built.

    The root type is the first declared node type. Closure productions come
    after the productions they were derived from and never take part in
    signature lookup: a tree node always records a base production.
    """

    def __init__(self, node_types: Sequence[NodeType], productions: Sequence[Production],
                 root_type: Optional[NodeType] = None):
        if len(node_types) == 0:
            raise GrammarError("grammar declares no node types")
        self.node_types: Tuple[NodeType, ...] = tuple(node_types)
        self.productions: Tuple[Production, ...] = tuple(productions)
        self.root_type = root_type if root_type is not None else self.node_types[0]

        self._types: Dict[str, NodeType] = {}
        self._type_index: Dict[str, int] = {}
        for ix, node_type in enumerate(self.node_types):
            if node_type.name in self._types:
                raise GrammarError(f"duplicate node type '{node_type.name}'")
            self._types[node_type.name] = node_type
            self._type_index[node_type.name] = ix
        if self.root_type.name not in self._types:
            raise GrammarError(f"unknown node type '{self.root_type.name}'")

        by_head: Dict[str, List[int]] = {t.name: [] for t in self.node_types}
        self._signatures: Dict[Signature, int] = {}
        self._closures: Dict[Tuple[int, ...], int] = {}
        for ix, production in enumerate(self.productions):
            if production.id != ix:
                raise GrammarError(f"production ids must be dense, got {production.id} at {ix}")
            self._check_production(production)
            by_head[production.head.name].append(production.id)
            if production.is_closure:
                self._closures[production.closure_chain] = production.id
            else:
                if production.signature in self._signatures:
                    raise GrammarError(f"duplicate production '{production}'")
                self._signatures[production.signature] = production.id
        self.productions_by_head: Dict[str, Tuple[int, ...]] = {k: tuple(v) for k, v in by_head.items()}
        self._text = None

    def _check_production(self, production: Production) -> None:
        head = production.head
        if head.name not in self._types:
            raise GrammarError(f"unknown node type '{head.name}'")
        if head.is_variable:
            raise GrammarError(f"variable terminal '{head.name}' used as head")
        if head.is_operation:
            raise GrammarError(f"operation terminal '{head.name}' used as head")
        labels = set()
        for field in production.fields:
            if self._types.get(field.type.name) != field.type:
                raise GrammarError(f"unknown node type '{field.type.name}'")
            if field.label in labels:
                raise GrammarError(f"duplicate field label '{field.label}' in '{production}'")
            labels.add(field.label)
        if production.is_closure:
            chain = production.closure_chain
            if len(chain) < 2:
                raise GrammarError(f"closure '{production}' needs a chain of at least 2 productions")
            expected = head
            for rule_id in chain:
                if not 0 <= rule_id < production.id:
                    raise GrammarError(f"closure '{production}' refers to unknown production {rule_id}")
                link = self.productions[rule_id]
                if link.is_closure or len(link.fields) != 1 or link.head != expected:
                    raise GrammarError(f"closure '{production}' has a broken chain at production {rule_id}")
                expected = link.fields[0].type
            if production.fields != self.productions[chain[-1]].fields:
                raise GrammarError(f"closure '{production}' fields differ from its last link")

    # lookups

    def __len__(self) -> int:
        return len(self.productions)

    def __contains__(self, name: str) -> bool:
        return name in self._types

    def node_type(self, name: str) -> NodeType:
        try:
            return self._types[name]
        except KeyError:
            raise GrammarError(f"unknown node type '{name}'") from None

    def type_index(self, node_type: NodeType) -> int:
        try:
            return self._type_index[node_type.name]
        except KeyError:
            raise GrammarError(f"unknown node type '{node_type.name}'") from None

    def rules_for(self, node_type: NodeType) -> Tuple[Production, ...]:
        return tuple(self.productions[ix] for ix in self.productions_by_head.get(node_type.name, ()))

    def lookup(self, head: str, fields: Iterable[Tuple[str, str]]) -> Optional[Production]:
        ix = self._signatures.get(signature_of(head, fields))
        return None if ix is None else self.productions[ix]

    def closure_for_chain(self, chain: Tuple[int, ...]) -> Optional[Production]:
        ix = self._closures.get(tuple(chain))
        return None if ix is None else self.productions[ix]

    @property
    def closures(self) -> Tuple[Production, ...]:
        return tuple(p for p in self.productions if p.is_closure)

    @property
    def base_productions(self) -> Tuple[Production, ...]:
        return tuple(p for p in self.productions if not p.is_closure)

    @property
    def has_variable_terminals(self) -> bool:
        return any(t.is_variable for t in self.node_types)

    # serialization

    def to_text(self) -> str:
        if self._text is None:
            lines = []
            for node_type in self.node_types:
                keyword = {NodeKind.VARIABLE: " variable", NodeKind.OPERATION: " op"}.get(node_type.kind, "")
                lines.append(f"type {node_type.name}{keyword}")
            for production in self.productions:
                if production.is_closure:
                    chain = " ".join(str(ix) for ix in production.closure_chain)
                    lines.append(f"closure {production.head.name} -> {chain}")
                else:
                    rhs = " ".join(f"{f.label}:{f.type.name}" for f in production.fields)
                    lines.append(f"rule {production.head.name} -> {rhs}".rstrip())
            self._text = "\n".join(lines) + "\n"
        return self._text

    @property
    def grammar_hash(self) -> str:
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()

    def with_closures(self, chains: Iterable[Tuple[int, ...]]) -> "Grammar":
        """Return a new grammar with one closure production appended per chain."""
        productions = list(self.productions)
        for chain in chains:
            chain = tuple(chain)
            if chain in self._closures:
                continue
            last = self.productions[chain[-1]]
            productions.append(Production(
                id=len(productions),
                head=self.productions[chain[0]].head,
                fields=last.fields,
                closure_chain=chain,
            ))
        return Grammar(self.node_types, productions, self.root_type)

    def __repr__(self) -> str:
        return (f"Grammar(root={self.root_type.name}, node_types={len(self.node_types)}, "
                f"productions={len(self.productions)}, closures={len(self.closures)})")


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].strip()


def load_grammar(text: str) -> Grammar:
    """
    Parse the declarative grammar format.

    One declaration per line, `#` starts a comment:
        type <name> [terminal|variable|op]
        rule <Head> -> <label>:<Type> ...
        closure <Head> -> <production id> <production id> ...
    Production ids are assigned in file order starting at 0.
    """
    declarations = []
    node_types: List[NodeType] = []
    types: Dict[str, NodeType] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        parts = line.split()
        keyword = parts[0]
        if keyword == "type":
            if len(parts) not in (2, 3):
                raise GrammarError("expected 'type <name> [terminal|variable|op]'", lineno)
            name = parts[1]
            if not TYPE_NAME.match(name):
                raise GrammarError(f"invalid node type name '{name}'", lineno)
            kind = NodeKind.NONTERMINAL
            if len(parts) == 3:
                if parts[2] not in KIND_KEYWORDS:
                    raise GrammarError(f"unknown node kind '{parts[2]}'", lineno)
                kind = KIND_KEYWORDS[parts[2]]
            if name in types:
                raise GrammarError(f"duplicate node type '{name}'", lineno)
            types[name] = NodeType(name, kind)
            node_types.append(types[name])
        elif keyword in ("rule", "closure"):
            if len(parts) < 3 or parts[2] != "->":
                raise GrammarError(f"expected '{keyword} <Head> -> ...'", lineno)
            declarations.append((lineno, keyword, parts[1], parts[3:]))
        else:
            raise GrammarError(f"unknown declaration '{keyword}'", lineno)

    if not node_types:
        raise GrammarError("grammar declares no node types")

    def resolve(name: str, lineno: int) -> NodeType:
        if name not in types:
            raise GrammarError(f"unknown node type '{name}'", lineno)
        return types[name]

    productions: List[Production] = []
    signatures = set()
    for lineno, keyword, head_name, rhs in declarations:
        head = resolve(head_name, lineno)
        if head.is_variable:
            raise GrammarError(f"variable terminal '{head_name}' used as head", lineno)
        if head.is_operation:
            raise GrammarError(f"operation terminal '{head_name}' used as head", lineno)
        if keyword == "rule":
            fields = []
            for item in rhs:
                label, sep, type_name = item.partition(":")
                if not sep or not LABEL_NAME.match(label):
                    raise GrammarError(f"expected '<label>:<Type>', got '{item}'", lineno)
                if label in {f.label for f in fields}:
                    raise GrammarError(f"duplicate field label '{label}'", lineno)
                fields.append(Field(label, resolve(type_name, lineno)))
            production = Production(len(productions), head, tuple(fields))
            if production.signature in signatures:
                raise GrammarError(f"duplicate production '{production}'", lineno)
            signatures.add(production.signature)
        else:
            try:
                chain = tuple(int(ix) for ix in rhs)
            except ValueError:
                raise GrammarError("closure chains list production ids", lineno) from None
            if len(chain) < 2 or any(not 0 <= ix < len(productions) for ix in chain):
                raise GrammarError("closure chain must name at least 2 earlier productions", lineno)
            production = Production(len(productions), head, productions[chain[-1]].fields, chain)
        productions.append(production)

    grammar = Grammar(node_types, productions)
    logger.debug(f"Loaded {grammar!r}")
    return grammar


def load_grammar_file(path: str) -> Grammar:
    with open(path, encoding="utf-8") as f:
        return load_grammar(f.read())
