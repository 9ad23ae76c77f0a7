import os
import random

import numpy as np
import torch
import torch.optim


def set_random_seed(seed=0):
    os.environ['PYTHONHASHSEED'] = str(seed)
    random.seed(seed)
    np.random.seed(seed)
    torch.manual_seed(seed)
    torch.use_deterministic_algorithms(True, warn_only=True)


def apply_thread_cap():
    """Cap intra-op threads by SYNFORGE_THREADS when it is set."""
    value = os.environ.get('SYNFORGE_THREADS')
    if value and value.isdigit() and int(value) > 0:
        torch.set_num_threads(int(value))


def get_optimizer_and_scheduler(model, config):
    params = [p for p in model.parameters() if p.requires_grad]
    optimizer = torch.optim.Adam(params, lr=config.train.lr, betas=(0.9, 0.999), eps=1e-8)
    scheduler = None
    if config.train.lr_decay is not None:
        # stepped with dev accuracy
        scheduler = torch.optim.lr_scheduler.ReduceLROnPlateau(
            optimizer=optimizer,
            mode='max',
            factor=config.train.lr_decay,
            patience=max(config.train.patience // 2, 1),
            min_lr=1e-5
        )
    return optimizer, scheduler


def count_model_params(model, requires_grad: bool = True):
    """
    Return total # of trainable parameters
    """
    if requires_grad:
        model_parameters = filter(lambda p: p.requires_grad, model.parameters())
    else:
        model_parameters = model.parameters()
    return int(sum(np.prod(p.size()) for p in model_parameters))
