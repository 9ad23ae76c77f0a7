# -*- coding: utf-8 -*-

"""
Experiment configuration.

Files under `configs/` have three sections, `data`, `model` and `train`,
matching the dataclasses below. Values are merged defaults < file < dotlist
overrides (`train.lr=0.0005 model.dropout=0.3`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import torch
from omegaconf import OmegaConf
from omegaconf.errors import OmegaConfBaseException

from synforge.errors import ConfigError

DROPOUT_CHOICES = (0.0, 0.2, 0.3, 0.4)
DTYPES = {"float64": torch.float64, "float32": torch.float32}


@dataclass
class DataArgs:
    language: str = "minipy"
    grammar: Optional[str] = None  # bundled grammar of `language` when unset
    train_file: Optional[str] = None
    dev_file: Optional[str] = None
    closure_k: int = 0  # 0 disables unary closure
    src_freq_cutoff: int = 3
    terminal_freq_cutoff: int = 3


@dataclass
class ModelArgs:
    embed_size: int = 128
    node_type_embed_size: int = 64
    hidden_size: int = 256
    encoder_hidden_size: int = 128
    scorer_hidden_size: int = 50
    dropout: float = 0.2
    use_parent_feeding: bool = True
    use_frontier_embedding: bool = True
    use_copy: bool = True
    mask_rule_softmax: bool = False


@dataclass
class OptimArgs:
    batch_size: int = 10
    max_epochs: int = 50
    patience: int = 10
    seed: int = 0
    lr: float = 1e-3
    lr_decay: Optional[float] = None  # ReduceLROnPlateau factor on dev accuracy
    max_grad_norm: float = 5.0
    dev_beam_size: int = 15
    max_steps: int = 300
    eval_every: int = 1
    stop_at_accuracy: Optional[float] = None
    output_dir: str = "checkpoints"
    dtype: str = "float64"


@dataclass
class TrainConfig:
    data: DataArgs = field(default_factory=DataArgs)
    model: ModelArgs = field(default_factory=ModelArgs)
    train: OptimArgs = field(default_factory=OptimArgs)

    @property
    def torch_dtype(self) -> torch.dtype:
        return DTYPES[self.train.dtype]


def validate_config(config: TrainConfig) -> TrainConfig:
    sizes = {
        "model.embed_size": config.model.embed_size,
        "model.node_type_embed_size": config.model.node_type_embed_size,
        "model.hidden_size": config.model.hidden_size,
        "model.encoder_hidden_size": config.model.encoder_hidden_size,
        "model.scorer_hidden_size": config.model.scorer_hidden_size,
        "train.batch_size": config.train.batch_size,
        "train.max_epochs": config.train.max_epochs,
        "train.patience": config.train.patience,
        "train.dev_beam_size": config.train.dev_beam_size,
        "train.max_steps": config.train.max_steps,
        "train.eval_every": config.train.eval_every,
        "data.src_freq_cutoff": config.data.src_freq_cutoff,
        "data.terminal_freq_cutoff": config.data.terminal_freq_cutoff,
    }
    for name, value in sizes.items():
        if value < 1:
            raise ConfigError(f"{name} must be >= 1, got {value}")
    if config.model.dropout not in DROPOUT_CHOICES:
        raise ConfigError(f"model.dropout must be one of {DROPOUT_CHOICES}, got {config.model.dropout}")
    if config.data.closure_k < 0:
        raise ConfigError(f"data.closure_k must be >= 0, got {config.data.closure_k}")
    if config.train.lr < 0:
        raise ConfigError(f"train.lr must be >= 0, got {config.train.lr}")
    if config.train.lr_decay is not None and not 0.0 < config.train.lr_decay < 1.0:
        raise ConfigError(f"train.lr_decay must be in (0, 1), got {config.train.lr_decay}")
    if config.train.dtype not in DTYPES:
        raise ConfigError(f"train.dtype must be one of {sorted(DTYPES)}, got {config.train.dtype!r}")
    return config


def load_config(path: Optional[str] = None, overrides: Sequence[str] = ()) -> TrainConfig:
    try:
        merged = OmegaConf.structured(TrainConfig)
        if path is not None:
            merged = OmegaConf.merge(merged, OmegaConf.load(path))
        if overrides:
            merged = OmegaConf.merge(merged, OmegaConf.from_dotlist(list(overrides)))
        config = OmegaConf.to_object(merged)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except OmegaConfBaseException as e:
        raise ConfigError(f"invalid configuration: {e}") from None
    return validate_config(config)


def config_to_dict(config: TrainConfig) -> dict:
    return OmegaConf.to_container(OmegaConf.structured(config), resolve=True)
