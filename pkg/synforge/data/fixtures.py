# -*- coding: utf-8 -*-

"""
Seeded generator of the bundled fixture corpora.

Every pair is produced by a template that writes the description and the
code together, so the code always parses under the bundled grammar.
"""

from __future__ import annotations

import hashlib
import json
import string
from pathlib import Path
from typing import Callable, Dict, List, Sequence, Tuple, TypeVar, Union

from transformers.utils import logging

from synforge.data.dataset import write_jsonl
from synforge.lang import flowdsl, language_grammar
from synforge.transition.oracle import tokenize_terminal

logger = logging.get_logger(__name__)

DEFAULT_SEED = 1234
OVERFIT_SIZE = 30

VARIABLES = ["result", "total", "items", "my_list", "count", "value", "name", "data", "entry", "cache",
             "line", "path", "user", "flag", "text"]
FUNCTIONS = ["sorted", "len", "print", "open", "range", "max", "min", "sum", "str", "int", "list",
             "process", "load_data", "makeKey"]
METHODS = ["append", "get", "join", "split", "strip", "keys", "update", "lower", "add", "remove"]
KEYWORD_ARGS = ["reverse", "key", "default", "sep", "mode"]
CONSTANTS = ["True", "False", "None"]
STRINGS = ["cache entry", "utf-8", "hello world", "r", "w", "error", "done", "user name", "a b c"]
OPERATORS = [("+", "plus"), ("-", "minus"), ("*", "times"), ("/", "divided by")]

Pair = Tuple[str, str]
T = TypeVar("T")


class Draws:
    """
    Reproducible choices for one corpus. Draw k of record ix is the first 32
    bits of sha256("<seed>:<stream>:<ix>:<k>") modulo the pool size.
    """

    def __init__(self, seed: int, stream: str):
        self.seed = seed
        self.stream = stream
        self.record(0)

    def record(self, ix: int) -> None:
        self.ix, self.k = ix, 0

    def below(self, n: int) -> int:
        key = f"{self.seed}:{self.stream}:{self.ix}:{self.k}"
        self.k += 1
        return int(hashlib.sha256(key.encode("utf-8")).hexdigest()[:8], 16) % n

    def choice(self, pool: Sequence[T]) -> T:
        return pool[self.below(len(pool))]

    def randint(self, low: int, high: int) -> int:
        return low + self.below(high - low + 1)


def _quote(text: str) -> str:
    return f"'{text}'"


class MiniPyTemplates:
    """Description/code templates over small identifier pools."""

    def __init__(self, rng: Draws):
        self.rng = rng

    def pick(self, pool):
        return self.rng.choice(pool)

    def number(self) -> str:
        return str(self.rng.randint(0, 20))

    def call_with_keyword(self) -> Pair:
        func, arg, kw, const = self.pick(FUNCTIONS), self.pick(VARIABLES), self.pick(KEYWORD_ARGS), self.pick(CONSTANTS)
        return (f"call the function {func} with argument {arg} and {kw} set to {const}",
                f"{func}({arg}, {kw}={const})")

    def assign_call(self) -> Pair:
        target, func, arg = self.pick(VARIABLES), self.pick(FUNCTIONS), self.pick(VARIABLES)
        return f"set {target} to the result of {func} applied to {arg}", f"{target} = {func}({arg})"

    def method_call(self) -> Pair:
        obj, method, arg = self.pick(VARIABLES), self.pick(METHODS), self.pick(VARIABLES)
        return f"call method {obj}.{method} with {arg}", f"{obj}.{method}({arg})"

    def assign_string(self) -> Pair:
        target, text = self.pick(VARIABLES), self.pick(STRINGS)
        return f"{target} is a string {_quote(text)}", f"{target} = {_quote(text)}"

    def assign_number(self) -> Pair:
        target, n = self.pick(VARIABLES), self.number()
        return f"set {target} to {n}", f"{target} = {n}"

    def binop(self) -> Pair:
        target, left, right = self.pick(VARIABLES), self.pick(VARIABLES), self.number()
        symbol, word = self.pick(OPERATORS)
        return f"{target} is {left} {word} {right}", f"{target} = ({left} {symbol} {right})"

    def if_append(self) -> Pair:
        cond, obj, arg = self.pick(VARIABLES), self.pick(VARIABLES), self.pick(VARIABLES)
        return (f"if {cond} is true , append {arg} to {obj}",
                f"if {cond}:\n    {obj}.append({arg})")

    def if_else(self) -> Pair:
        cond, yes, no = self.pick(VARIABLES), self.pick(STRINGS), self.pick(STRINGS)
        if yes == no:
            no = "done" if yes != "done" else "error"
        return (f"if {cond} print {_quote(yes)} otherwise print {_quote(no)}",
                f"if {cond}:\n    print({_quote(yes)})\nelse:\n    print({_quote(no)})")

    def for_loop(self) -> Pair:
        var, seq, func = self.pick(["item", "x", "row", "key"]), self.pick(VARIABLES), self.pick(FUNCTIONS)
        return f"for every {var} in {seq} call {func} on {var}", f"for {var} in {seq}:\n    {func}({var})"

    def sort_lambda(self) -> Pair:
        target, seq, attr = self.pick(VARIABLES), self.pick(VARIABLES), self.pick(["name", "size", "count", "key"])
        return (f"{target} is {seq} sorted by the {attr} of each element x",
                f"{target} = sorted({seq}, key=lambda x: x.{attr})")

    def attribute_assign(self) -> Pair:
        attr, value = self.pick(VARIABLES), self.pick(VARIABLES)
        return f"set self.{attr} to {value}", f"self.{attr} = {value}"

    def two_statements(self) -> Pair:
        first_nl, first_code = self.assign_number()
        second_nl, second_code = self.assign_call()
        return f"{first_nl} and then {second_nl}", f"{first_code}\n{second_code}"

    def open_file(self) -> Pair:
        target, path, mode = self.pick(VARIABLES), self.pick(VARIABLES), self.pick(["r", "w"])
        return (f"open the file {path} in mode {_quote(mode)} and store it in {target}",
                f"{target} = open({path}, mode={_quote(mode)})")

    def all(self) -> List[Callable[[], Pair]]:
        return [self.call_with_keyword, self.assign_call, self.method_call, self.assign_string, self.assign_number,
                self.binop, self.if_append, self.if_else, self.for_loop, self.sort_lambda, self.attribute_assign,
                self.two_statements, self.open_file]


def minipy_pairs(n: int, seed: int = DEFAULT_SEED, prefix: str = "minipy") -> List[dict]:
    rng = Draws(seed, "minipy")
    templates = MiniPyTemplates(rng)
    records = []
    for ix in range(n):
        rng.record(ix)
        nl, code = rng.choice(templates.all())()
        records.append({"id": f"{prefix}-{ix:04d}", "nl": nl, "code": code})
    return records


def _oov_identifier(rng: Draws, seen: set) -> str:
    while True:
        name = "v" + "".join(rng.choice(string.ascii_lowercase) for _ in range(5))
        if name not in seen:
            seen.add(name)
            return name


def copy_pairs(n: int, seed: int = DEFAULT_SEED) -> List[dict]:
    """Every target contains an identifier that occurs once in the corpus and appears in its description."""
    rng = Draws(seed, "copy")
    seen: set = set()
    records = []
    for ix in range(n):
        rng.record(ix)
        oov = _oov_identifier(rng, seen)
        func = rng.choice(["print", "len", "process", "sorted"])
        choice = rng.below(3)
        if choice == 0:
            nl, code = f"call {func} on {oov}", f"{func}({oov})"
        elif choice == 1:
            n_value = str(rng.randint(0, 20))
            nl, code = f"set {oov} to {n_value}", f"{oov} = {n_value}"
        else:
            nl, code = f"append {oov} to items", f"items.append({oov})"
        records.append({"id": f"copy-{ix:04d}", "nl": nl, "code": code})
    return records


def _phrase(identifier: str) -> str:
    return " ".join(token.lower() for token in tokenize_terminal(identifier))


FLOW_TEMPLATES = [
    "if {tf} on {tc} then {af} on {ac}",
    "{af} with {ac} when {tf} in {tc}",
    "when {tf} on {tc} , {af} via {ac}",
    "{tc} {tf} to {ac} {af}",
]


def flowdsl_pairs(n: int, seed: int = DEFAULT_SEED) -> List[dict]:
    rng = Draws(seed, "flowdsl")
    records = []
    for ix in range(n):
        rng.record(ix)
        tc = rng.choice(sorted(flowdsl.TRIGGERS))
        tf = rng.choice(flowdsl.TRIGGERS[tc])
        ac = rng.choice(sorted(flowdsl.ACTIONS))
        af = rng.choice(flowdsl.ACTIONS[ac])
        nl = rng.choice(FLOW_TEMPLATES).format(tc=tc.lower(), tf=_phrase(tf), ac=ac.lower(), af=_phrase(af))
        records.append({"id": f"flowdsl-{ix:04d}", "nl": nl, "code": f"IF {tc}.{tf} THEN {ac}.{af}"})
    return records


def split(records: List[dict], dev: int, test: int) -> Dict[str, List[dict]]:
    train = len(records) - dev - test
    return {"train": records[:train], "dev": records[train:train + dev], "test": records[train + dev:]}


def write_fixtures(out_dir: Union[str, Path], seed: int = DEFAULT_SEED) -> dict:
    """
    Write the fixture corpora and a manifest.json with counts and grammar hashes:
      minipy.{train,dev,test}.jsonl  200 pairs
      flowdsl.{train,dev,test}.jsonl 100 pairs
      minipy_overfit.jsonl           the first 30 MiniPy training pairs
      copy.jsonl                     40 pairs
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files: Dict[str, List[dict]] = {}
    for name, records in split(minipy_pairs(200, seed), 20, 20).items():
        files[f"minipy.{name}.jsonl"] = records
    files["minipy_overfit.jsonl"] = files["minipy.train.jsonl"][:OVERFIT_SIZE]
    for name, records in split(flowdsl_pairs(100, seed), 10, 10).items():
        files[f"flowdsl.{name}.jsonl"] = records
    files["copy.jsonl"] = copy_pairs(40, seed)
    for name, records in files.items():
        write_jsonl(out / name, records)

    manifest = {
        "seed": seed,
        "counts": {name: len(records) for name, records in files.items()},
        "grammars": {
            language: {
                "hash": language_grammar(language).grammar_hash,
                "productions": len(language_grammar(language)),
                "node_types": len(language_grammar(language).node_types),
            }
            for language in ("minipy", "flowdsl")
        },
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
    logger.info(f"Wrote {sum(manifest['counts'].values())} fixture pairs to {out}")
    return manifest
