import math
import os
from typing import List, Optional, Sequence

import pandas as pd
import torch
import torch.nn as nn
from torch.utils.data import DataLoader
from tqdm import tqdm
from transformers.utils import logging

from eval.harness import decode_examples, evaluate_predictions
from synforge.data.dataset import Example
from synforge.data.vocab import Vocab
from synforge.errors import TrainingError
from synforge.grammar.grammar import Grammar
from synforge.models.syntax_parser import ActionBatch, SyntaxParserModel
from training.checkpoint import save_checkpoint
from training.config import TrainConfig, config_to_dict

logger = logging.get_logger(__name__)

CHECKPOINT_NAME = 'model.ckpt'
LOG_NAME = 'train_log.jsonl'


class DefaultTrainer():
    """
    Maximum-likelihood training on oracle action sequences with model
    selection by dev exact match. One record per epoch goes to
    `<output_dir>/train_log.jsonl`: {epoch, train_nll, dev_acc, dev_bleu, lr}.
    """

    def __init__(self, model: SyntaxParserModel, train_loader: DataLoader, dev_examples: Sequence[Example],
                 grammar: Grammar, vocab: Vocab, config: TrainConfig, optimizers):
        super().__init__()
        self.model = model
        self.train_loader = train_loader
        self.dev_examples = list(dev_examples)
        self.grammar = grammar
        self.vocab = vocab
        self.config = config
        self.args = config.train

        self.step = 0  # Total batches seen
        self.grad_step = 0  # Total optimizer updates
        self.optimizer, self.scheduler = optimizers

        self.num_train_epochs = self.args.max_epochs
        self.eval_every = self.args.eval_every
        self.patience = self.args.patience
        self.max_grad_norm = self.args.max_grad_norm

        self.epoch_log: List[dict] = []
        self.best_val_metric = -1.0
        self.best_val_metric_epoch = -1
        self.best_state = None
        self.init_checkpointing(config)

    def train(self) -> nn.Module:
        """
        Entire training run
        """
        model = self.model
        pbar = tqdm(range(self.num_train_epochs), leave=False, colour='white', desc='Training')
        for epoch in pbar:
            train_nll = self.train_step(model, epoch)
            record = {'epoch': epoch, 'train_nll': train_nll, 'dev_acc': None, 'dev_bleu': None,
                      'lr': self.optimizer.param_groups[0]['lr']}
            early_stopping = False
            if self.dev_examples and ((epoch + 1) % self.eval_every == 0 or epoch + 1 == self.num_train_epochs):
                metrics = self.eval_step(model, epoch)
                record.update(dev_acc=metrics['accuracy'], dev_bleu=metrics['bleu4'])
                early_stopping = self.should_stop(epoch, metrics['accuracy'])
            self.log_epoch(record)
            pbar.set_description(f"Training | epoch {epoch} | nll {train_nll:.3f} | best dev acc "
                                 f"{max(self.best_val_metric, 0.0):.3f}")
            if early_stopping:
                break

        if self.best_state is not None:
            model.load_state_dict(self.best_state)
            logger.info(f'-> Restored best model from epoch {self.best_val_metric_epoch} '
                        f'(dev acc {self.best_val_metric:.4f})')
        else:
            self.save(model)
        return model

    def train_step(self, model: SyntaxParserModel, epoch: int) -> float:
        model.train()
        pbar = tqdm(self.train_loader, leave=False, colour='blue',
                    desc=f'-> Training (epoch {epoch} / {self.num_train_epochs})')
        total_nll, n_examples = 0.0, 0
        for ix, batch in enumerate(pbar):
            self.optimizer.zero_grad()
            loss, nll = self.compute_loss(model, batch)
            if not torch.isfinite(loss):
                raise TrainingError(f"non-finite loss {loss.item()} at epoch {epoch}, batch {ix} "
                                    f"(batch size {batch.batch_size}, {batch.num_steps} steps, "
                                    f"lr {self.optimizer.param_groups[0]['lr']:g})")
            loss.backward()
            if self.max_grad_norm is not None:
                nn.utils.clip_grad_norm_(model.parameters(), self.max_grad_norm)
            self.optimizer.step()
            self.step += 1
            self.grad_step += 1
            total_nll += nll
            n_examples += batch.batch_size
            pbar.set_description(f"Training epoch {epoch} | loss: {total_nll / n_examples:.3f} "
                                 f"| lr: {self.optimizer.param_groups[0]['lr']:.5f} "
                                 f"| gradient step: {self.grad_step}")
        return total_nll / max(n_examples, 1)

    def compute_loss(self, model: SyntaxParserModel, batch: ActionBatch):
        """Negative log-likelihood averaged per example, and its batch sum."""
        log_probs = model(batch)
        loss = -log_probs.mean()
        return loss, -log_probs.detach().sum().item()

    def eval_step(self, model: SyntaxParserModel, epoch: int) -> dict:
        """
        Decode the dev set and keep the parameters with the best exact match
        """
        predictions = decode_examples(self.dev_examples, model, self.grammar, self.vocab,
                                      self.args.dev_beam_size, self.args.max_steps)
        report = evaluate_predictions(self.dev_examples, predictions)
        val_metric = report['accuracy']
        logger.info(f'Epoch {epoch} dev metrics: accuracy {val_metric:.4f} | bleu4 {report["bleu4"]:.4f}')

        if val_metric > self.best_val_metric:
            self.best_val_metric = val_metric
            self.best_val_metric_epoch = epoch
            self.best_state = {k: v.detach().clone() for k, v in model.state_dict().items()}
            self.save(model)
        if self.scheduler is not None:
            self.scheduler.step(val_metric)
        return report

    def should_stop(self, epoch: int, val_metric: float) -> bool:
        stop_at = self.args.stop_at_accuracy
        if stop_at is not None and val_metric >= stop_at:
            logger.info(f'-> Dev accuracy {val_metric:.4f} reached {stop_at}, stopping at epoch {epoch}')
            return True
        if epoch - self.best_val_metric_epoch >= self.patience:
            logger.info(f'-> No dev improvement for {self.patience} epochs, stopping at epoch {epoch}')
            return True
        return False

    def log_epoch(self, record: dict) -> None:
        self.epoch_log.append(record)
        if math.isnan(record['train_nll']):
            raise TrainingError(f"NaN training loss at epoch {record['epoch']}")
        # Inefficient, but keeps the log complete after every epoch
        pd.DataFrame(self.epoch_log).to_json(self.log_path, orient='records', lines=True)

    def save(self, model: SyntaxParserModel) -> None:
        save_checkpoint(self.checkpoint_path, model, self.grammar, self.vocab,
                        extra={'epoch': self.best_val_metric_epoch, 'dev_acc': self.best_val_metric,
                               'train_config': config_to_dict(self.config)})

    def init_checkpointing(self, config: TrainConfig) -> None:
        self.save_path = config.train.output_dir
        os.makedirs(self.save_path, exist_ok=True)
        self.checkpoint_path = os.path.join(self.save_path, CHECKPOINT_NAME)
        self.log_path = os.path.join(self.save_path, LOG_NAME)

    @property
    def best_checkpoint_path(self) -> Optional[str]:
        return self.checkpoint_path if os.path.exists(self.checkpoint_path) else None
