from synforge.data.canonicalize import abstract_strings, canonicalize, restore_placeholders, tokenize_description
from synforge.data.dataset import Corpus, Example, load_dataset, make_example, read_jsonl, write_jsonl
from synforge.data.vocab import Vocab, VocabTable, build_vocab

__all__ = [
    'abstract_strings', 'canonicalize', 'restore_placeholders', 'tokenize_description',
    'Corpus', 'Example', 'load_dataset', 'make_example', 'read_jsonl', 'write_jsonl',
    'Vocab', 'VocabTable', 'build_vocab',
]
