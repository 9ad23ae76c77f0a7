# -*- coding: utf-8 -*-

from synforge.models import SyntaxParserConfig, SyntaxParserModel

__version__ = '0.1.0'

__all__ = ['SyntaxParserConfig', 'SyntaxParserModel']
