"""Residual CNN with hand-rolled gradients, losses, Adam, and checkpoints."""

from .checkpoint import MAGIC, Checkpoint, load_checkpoint, save_checkpoint
from .losses import softmax, softmax_cross_entropy, triplet_loss
from .mining import Triplet, mine_triplets
from .network import ModelConfig, backward, embed, forward, init_params, param_shapes
from .optim import AdamState, adam_step
from .train import HyperParams, infer, train

__all__ = [
    "AdamState",
    "Checkpoint",
    "HyperParams",
    "MAGIC",
    "ModelConfig",
    "Triplet",
    "adam_step",
    "backward",
    "embed",
    "forward",
    "infer",
    "init_params",
    "load_checkpoint",
    "mine_triplets",
    "param_shapes",
    "save_checkpoint",
    "softmax",
    "softmax_cross_entropy",
    "train",
    "triplet_loss",
]
