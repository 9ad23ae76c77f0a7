from synforge.inference.beam_search import (
    BeamSearch,
    DecodeResult,
    Hypothesis,
    beam_search,
    decode_corpus,
    greedy_decode,
    num_threads,
)

__all__ = ['BeamSearch', 'DecodeResult', 'Hypothesis', 'beam_search', 'decode_corpus', 'greedy_decode',
           'num_threads']
