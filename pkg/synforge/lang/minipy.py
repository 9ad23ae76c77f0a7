# -*- coding: utf-8 -*-

"""
MiniPy surface syntax.

`render` turns a complete MiniPy tree into source text and `parse` is its
inverse, producing raw trees (no production ids; see `synforge.tree.bind`).
For every complete tree, parse(render(t)) equals t.

Terminal spelling:
  - identifiers are stored camel-case split and rendered by concatenation
    when the concatenation is an identifier that splits back into the same
    tokens; any other token list is rendered quoted, `tok tok`;
  - numbers are a single numeral token, anything else is rendered #`tok tok`;
  - string literals are whitespace split and rendered space-joined inside
    single quotes.
Inside quoted forms and string literals a token escapes whitespace and the
closing quote as \\<hex>; and the empty token is \\; (see `escape_token`).
"""

from __future__ import annotations

import re
from typing import List, Optional, Sequence, Tuple, Union

from synforge.errors import AstError
from synforge.grammar.grammar import NodeKind, NodeType
from synforge.transition.oracle import tokenize_terminal
from synforge.tree.ast import AstNode

INDENT = "    "

ROOT = NodeType("root")
STMT = NodeType("stmt")
STMTS = NodeType("stmt*")
EXPR = NodeType("expr")
EXPRS = NodeType("expr*")
KEYWORD = NodeType("keyword")
KEYWORDS = NodeType("keyword*")
IDENTIFIERS = NodeType("identifier*")
OPERATOR = NodeType("operator")
IDENTIFIER = NodeType("identifier", NodeKind.VARIABLE)
STRING = NodeType("string", NodeKind.VARIABLE)
NUMBER = NodeType("number", NodeKind.VARIABLE)

# constructor type -> label of its field under stmt/expr
STMT_LABELS = {"Assign": "assign", "Expr": "expr", "If": "if", "For": "for"}
EXPR_LABELS = {
    "Call": "call", "Name": "name", "Num": "num", "Str": "str",
    "Attribute": "attribute", "Lambda": "lambda", "BinOp": "binop",
}
OPERATORS = {"Add": "+", "Sub": "-", "Mult": "*", "Div": "/"}
SYMBOL_OPS = {v: k for k, v in OPERATORS.items()}
KEYWORDS_RESERVED = frozenset(["if", "else", "for", "in", "lambda", "pass"])

IDENT = re.compile(r"[A-Za-z_]\w*")
NUMERAL = re.compile(r"\d+(?:\.\d+)?")
ESCAPE = re.compile(r"\\([0-9a-f]*);")
ESCAPE_START = frozenset("0123456789abcdef;")


# ----------------------
# Token spelling
# ----------------------
def escape_token(token: str, quote: str) -> str:
    """
    Spell `token` without whitespace or `quote`: those characters become
    \\<hex>;, a backslash that would read as an escape becomes \\5c; and the
    empty token is \\;. `unescape_token` inverts it.
    """
    if not token:
        return "\\;"
    out = []
    for ix, ch in enumerate(token):
        following = token[ix + 1:ix + 2]
        if ch.isspace() or ch == quote or (ch == "\\" and following and following in ESCAPE_START):
            out.append(f"\\{ord(ch):x};")
        else:
            out.append(ch)
    return "".join(out)


def _unescape(match: re.Match) -> str:
    if not match[1]:
        return ""
    code = int(match[1], 16)
    return chr(code) if code <= 0x10FFFF else match[0]


def unescape_token(text: str) -> str:
    return ESCAPE.sub(_unescape, text)


def split_escaped(text: str) -> List[str]:
    return [unescape_token(piece) for piece in text.split()]


def render_identifier(tokens: Sequence[str]) -> str:
    text = "".join(tokens)
    if (all(tokens) and IDENT.fullmatch(text) and text not in KEYWORDS_RESERVED
            and tokenize_terminal(text) == list(tokens)):
        return text
    return "`" + " ".join(escape_token(token, "`") for token in tokens) + "`"


def render_number(tokens: Sequence[str]) -> str:
    if len(tokens) == 1 and NUMERAL.fullmatch(tokens[0]):
        return tokens[0]
    return "#`" + " ".join(escape_token(token, "`") for token in tokens) + "`"


def render_string(tokens: Sequence[str]) -> str:
    return "'" + " ".join(escape_token(token, "'") for token in tokens) + "'"


# ----------------------
# Raw tree builders
# ----------------------
Tokens = Union[str, Sequence[str]]


def nt(name: str, label: Optional[str], children: List[AstNode]) -> AstNode:
    return AstNode.nonterminal(NodeType(name), children, label=label)


def seq(list_type: NodeType, label: str, items: List[AstNode]) -> AstNode:
    for ix, item in enumerate(items):
        item.label = f"item{ix}"
    return AstNode.nonterminal(list_type, items, label=label)


def ident(label: Optional[str], value: Tokens) -> AstNode:
    """`value` is source text (camel-case split here) or an already split token list."""
    tokens = tokenize_terminal(value) if isinstance(value, str) else list(value)
    return AstNode.terminal(IDENTIFIER, tokens, label=label)


def expr(label: Optional[str], node: AstNode) -> AstNode:
    node.label = EXPR_LABELS[node.type.name]
    return AstNode.nonterminal(EXPR, [node], label=label)


def stmt(node: AstNode) -> AstNode:
    node.label = STMT_LABELS[node.type.name]
    return AstNode.nonterminal(STMT, [node])


def name(value: Tokens, label: Optional[str] = None) -> AstNode:
    return expr(label, nt("Name", None, [ident("id", value)]))


def num(value: Tokens, label: Optional[str] = None) -> AstNode:
    tokens = [value] if isinstance(value, str) else list(value)
    return expr(label, nt("Num", None, [AstNode.terminal(NUMBER, tokens, label="n")]))


def string(value: Tokens, label: Optional[str] = None) -> AstNode:
    """`value` is the literal's text between the quotes, or its token list."""
    tokens = split_escaped(value) if isinstance(value, str) else list(value)
    if not tokens:
        raise AstError("empty string literals are not supported")
    return expr(label, nt("Str", None, [AstNode.terminal(STRING, tokens, label="s")]))


def call(func: AstNode, args: List[AstNode], keywords: List[Tuple[Tokens, AstNode]],
         label: Optional[str] = None) -> AstNode:
    func.label = "func"
    kws = []
    for arg, value in keywords:
        value.label = "value"
        kws.append(AstNode.nonterminal(KEYWORD, [ident("arg", arg), value]))
    return expr(label, nt("Call", None, [func, seq(EXPRS, "args", args), seq(KEYWORDS, "keywords", kws)]))


def attribute(value: AstNode, attr: Tokens, label: Optional[str] = None) -> AstNode:
    value.label = "value"
    return expr(label, nt("Attribute", None, [value, ident("attr", attr)]))


def lambda_(args: List[Tokens], body: AstNode, label: Optional[str] = None) -> AstNode:
    body.label = "body"
    ids = seq(IDENTIFIERS, "args", [ident(None, a) for a in args])
    return expr(label, nt("Lambda", None, [ids, body]))


def binop(left: AstNode, op: str, right: AstNode, label: Optional[str] = None) -> AstNode:
    left.label, right.label = "left", "right"
    operator = AstNode.nonterminal(OPERATOR, [AstNode.operation(NodeType(op, NodeKind.OPERATION), label="op")],
                                   label="op")
    return expr(label, nt("BinOp", None, [left, operator, right]))


def assign(target: AstNode, value: AstNode) -> AstNode:
    target.label, value.label = "target", "value"
    return stmt(nt("Assign", None, [target, value]))


def expr_stmt(value: AstNode) -> AstNode:
    value.label = "value"
    return stmt(nt("Expr", None, [value]))


def if_(test: AstNode, body: List[AstNode], orelse: List[AstNode]) -> AstNode:
    test.label = "test"
    return stmt(nt("If", None, [test, seq(STMTS, "body", body), seq(STMTS, "orelse", orelse)]))


def for_(target: AstNode, iter: AstNode, body: List[AstNode]) -> AstNode:
    target.label, iter.label = "target", "iter"
    return stmt(nt("For", None, [target, iter, seq(STMTS, "body", body)]))


def module(body: List[AstNode]) -> AstNode:
    return AstNode.nonterminal(ROOT, [seq(STMTS, "body", body)])


# ----------------------
# Rendering
# ----------------------
def _fields(node: AstNode) -> dict:
    return {child.label: child for child in node.children}


def _inner(expr_node: AstNode) -> AstNode:
    return expr_node.children[0]


def _wrap(expr_node: AstNode, parenthesize: Tuple[str, ...]) -> str:
    text = render_expr(expr_node)
    return f"({text})" if _inner(expr_node).type.name in parenthesize else text


def render_expr(node: AstNode) -> str:
    inner = _inner(node)
    kind = inner.type.name
    f = _fields(inner)
    if kind == "Name":
        return render_identifier(f["id"].tokens)
    if kind == "Num":
        return render_number(f["n"].tokens)
    if kind == "Str":
        return render_string(f["s"].tokens)
    if kind == "Call":
        args = [render_expr(a) for a in f["args"].children]
        for kw in f["keywords"].children:
            kf = _fields(kw)
            args.append(f"{render_identifier(kf['arg'].tokens)}={render_expr(kf['value'])}")
        return f"{_wrap(f['func'], ('Lambda', 'Num'))}({', '.join(args)})"
    if kind == "Attribute":
        return f"{_wrap(f['value'], ('Lambda', 'Num'))}.{render_identifier(f['attr'].tokens)}"
    if kind == "Lambda":
        args = ", ".join(render_identifier(a.tokens) for a in f["args"].children)
        return f"lambda {args}: {render_expr(f['body'])}"
    if kind == "BinOp":
        op = OPERATORS[f["op"].children[0].type.name]
        return f"({_wrap(f['left'], ('Lambda',))} {op} {_wrap(f['right'], ('Lambda',))})"
    raise AstError(f"node type '{kind}' is foreign to MiniPy")


def _render_block(stmts: AstNode, depth: int) -> List[str]:
    if not stmts.children:
        return [INDENT * depth + "pass"]
    lines = []
    for child in stmts.children:
        lines.extend(_render_stmt(child, depth))
    return lines


def _render_stmt(node: AstNode, depth: int) -> List[str]:
    inner = node.children[0]
    f = _fields(inner)
    pad = INDENT * depth
    kind = inner.type.name
    if kind == "Assign":
        return [f"{pad}{render_expr(f['target'])} = {render_expr(f['value'])}"]
    if kind == "Expr":
        return [pad + render_expr(f["value"])]
    if kind == "If":
        lines = [f"{pad}if {render_expr(f['test'])}:"] + _render_block(f["body"], depth + 1)
        if f["orelse"].children:
            lines += [f"{pad}else:"] + _render_block(f["orelse"], depth + 1)
        return lines
    if kind == "For":
        return ([f"{pad}for {render_expr(f['target'])} in {render_expr(f['iter'])}:"]
                + _render_block(f["body"], depth + 1))
    raise AstError(f"node type '{kind}' is foreign to MiniPy")


def render(ast: AstNode) -> str:
    """Render a bound or raw MiniPy tree; the caller checks completeness and derivability."""
    return "\n".join(_render_block(ast.children[0], 0))


# ----------------------
# Parsing
# ----------------------
TOKEN = re.compile(
    r"\s*(?:(?P<qnum>#`[^`]*`)|(?P<qname>`[^`]*`)|(?P<num>\d+(?:\.\d+)?)|(?P<name>[A-Za-z_]\w*)"
    r"|(?P<str>'[^']*'|\"[^\"]*\")|(?P<op>[-+*/(),.:=]))"
)
NAME_KINDS = ("name", "qname")


def tokenize(line: str, lineno: Optional[int] = None) -> List[Tuple[str, str]]:
    tokens, pos = [], 0
    line = line.rstrip()
    while pos < len(line):
        match = TOKEN.match(line, pos)
        if match is None or match.end() == pos:
            raise AstError(f"unexpected character {line[pos:].strip()[:1]!r}", lineno)
        kind = match.lastgroup
        value = match[kind]
        if kind == "name" and value in KEYWORDS_RESERVED:
            kind = "kw"
        tokens.append((kind, value))
        pos = match.end()
    return tokens


def tokenize_code(code: str) -> List[str]:
    """Lexical token stream of MiniPy text."""
    return [value for line in code.splitlines() for _, value in tokenize(line)]


class _LineParser:
    """Recursive descent over the tokens of one logical line."""

    def __init__(self, tokens: List[Tuple[str, str]], lineno: int):
        self.tokens = tokens
        self.pos = 0
        self.lineno = lineno

    def error(self, message: str) -> AstError:
        return AstError(message, self.lineno)

    def peek(self, offset: int = 0) -> Tuple[Optional[str], Optional[str]]:
        ix = self.pos + offset
        return self.tokens[ix] if ix < len(self.tokens) else (None, None)

    def next(self) -> Tuple[str, str]:
        if self.pos >= len(self.tokens):
            raise self.error("unexpected end of line")
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect(self, value: str) -> None:
        kind, got = self.next()
        if got != value:
            raise self.error(f"expected '{value}', got '{got}'")

    def at(self, value: str) -> bool:
        return self.peek()[1] == value

    def done(self) -> bool:
        return self.pos >= len(self.tokens)

    def name(self) -> List[str]:
        kind, value = self.next()
        if kind not in NAME_KINDS:
            raise self.error(f"expected an identifier, got '{value}'")
        return self.identifier_tokens(kind, value)

    def identifier_tokens(self, kind: str, value: str) -> List[str]:
        if kind == "name":
            return tokenize_terminal(value)
        tokens = split_escaped(value[1:-1])
        if not tokens:
            raise self.error("empty quoted identifier")
        return tokens

    def expr(self) -> AstNode:
        if self.at("lambda"):
            self.next()
            args = [self.name()]
            while self.at(","):
                self.next()
                args.append(self.name())
            self.expect(":")
            return lambda_(args, self.expr())
        return self.postfix()

    def postfix(self) -> AstNode:
        node = self.atom()
        while True:
            if self.at("("):
                self.next()
                args, keywords = [], []
                while not self.at(")"):
                    if self.peek()[0] in NAME_KINDS and self.peek(1)[1] == "=":
                        arg = self.name()
                        self.next()
                        keywords.append((arg, self.expr()))
                    elif keywords:
                        raise self.error("positional argument follows keyword argument")
                    else:
                        args.append(self.expr())
                    if not self.at(")"):
                        self.expect(",")
                self.next()
                node = call(node, args, keywords)
            elif self.at("."):
                self.next()
                node = attribute(node, self.name())
            else:
                return node

    def atom(self) -> AstNode:
        kind, value = self.next()
        if kind == "num":
            return num(value)
        if kind == "qnum":
            tokens = split_escaped(value[2:-1])
            if not tokens:
                raise self.error("empty quoted number")
            return num(tokens)
        if kind == "str":
            return string(value[1:-1])
        if kind in NAME_KINDS:
            return name(self.identifier_tokens(kind, value))
        if value == "(":
            inner = self.expr()
            if self.peek()[1] in SYMBOL_OPS:
                op = SYMBOL_OPS[self.next()[1]]
                inner = binop(inner, op, self.expr())
            self.expect(")")
            return inner
        raise self.error(f"unexpected '{value}'")


def _indent_of(line: str, lineno: int) -> int:
    spaces = len(line) - len(line.lstrip(" "))
    if spaces % len(INDENT):
        raise AstError(f"indentation of {spaces} spaces is not a multiple of {len(INDENT)}", lineno)
    return spaces // len(INDENT)


def parse(code: str) -> AstNode:
    """Parse MiniPy text into a raw tree."""
    lines = [(ix + 1, line) for ix, line in enumerate(code.splitlines()) if line.strip()]
    pos = 0

    def line_parser(lineno: int, text: str) -> _LineParser:
        return _LineParser(tokenize(text, lineno), lineno)

    def block(depth: int) -> List[AstNode]:
        nonlocal pos
        stmts: List[AstNode] = []
        saw_pass = False
        while pos < len(lines):
            lineno, text = lines[pos]
            indent = _indent_of(text, lineno)
            if indent < depth:
                break
            if indent > depth:
                raise AstError("unexpected indent", lineno)
            p = line_parser(lineno, text)
            if p.at("else"):
                break
            pos += 1
            if p.at("pass"):
                p.next()
                saw_pass = True
            elif p.at("if"):
                p.next()
                test = p.expr()
                p.expect(":")
                body = suite(depth, lineno)
                orelse: List[AstNode] = []
                if pos < len(lines) and _indent_of(lines[pos][1], lines[pos][0]) == depth:
                    q = line_parser(*lines[pos])
                    if q.at("else"):
                        q.next()
                        q.expect(":")
                        if not q.done():
                            raise AstError("trailing tokens after 'else:'", lines[pos][0])
                        pos += 1
                        orelse = suite(depth, lines[pos - 1][0])
                stmts.append(if_(test, body, orelse))
            elif p.at("for"):
                p.next()
                target = p.expr()
                p.expect("in")
                iterable = p.expr()
                p.expect(":")
                stmts.append(for_(target, iterable, suite(depth, lineno)))
            else:
                value = p.expr()
                if p.at("="):
                    p.next()
                    stmts.append(assign(value, p.expr()))
                else:
                    stmts.append(expr_stmt(value))
            if not p.done():
                raise AstError(f"unexpected '{p.peek()[1]}'", lineno)
        if saw_pass and stmts:
            raise AstError("'pass' mixed with statements", lines[pos - 1][0])
        return stmts

    def suite(depth: int, header: int) -> List[AstNode]:
        if pos >= len(lines) or _indent_of(lines[pos][1], lines[pos][0]) != depth + 1:
            raise AstError("expected an indented block", header)
        return block(depth + 1)

    body = block(0)
    if pos < len(lines):
        raise AstError("unexpected 'else'", lines[pos][0])
    return module(body)
