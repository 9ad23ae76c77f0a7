from transformers import AutoConfig, AutoModel

from synforge.models.syntax_parser.batching import ActionBatch, EncodedExample, encode_actions, make_batch
from synforge.models.syntax_parser.configuration_syntax_parser import SyntaxParserConfig
from synforge.models.syntax_parser.modeling_syntax_parser import DecoderStep, EncoderOutput, SyntaxParserModel

AutoConfig.register(SyntaxParserConfig.model_type, SyntaxParserConfig)
AutoModel.register(SyntaxParserConfig, SyntaxParserModel)


__all__ = [
    'SyntaxParserConfig', 'SyntaxParserModel', 'EncoderOutput', 'DecoderStep',
    'ActionBatch', 'EncodedExample', 'encode_actions', 'make_batch',
]
