# -*- coding: utf-8 -*-

from synforge.modules.dropout import VariationalDropout, check_dropout, dropout
from synforge.modules.gradcheck import GradcheckReport, finite_difference_check, relative_error
from synforge.modules.lstm import init_recurrent_, lstm_step, zero_state
from synforge.modules.mlp import Mlp1
from synforge.modules.ops import log_softmax, softmax

__all__ = [
    'VariationalDropout', 'check_dropout', 'dropout',
    'GradcheckReport', 'finite_difference_check', 'relative_error',
    'init_recurrent_', 'lstm_step', 'zero_state',
    'Mlp1',
    'log_softmax', 'softmax',
]
