from synforge.models.syntax_parser import SyntaxParserConfig, SyntaxParserModel

__all__ = ['SyntaxParserConfig', 'SyntaxParserModel']
