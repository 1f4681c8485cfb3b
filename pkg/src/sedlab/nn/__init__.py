"""Framework-free differentiable CRNN and its training machinery."""

from .adam import Adam
from .checkpoint import load_checkpoint, restore_model, save_checkpoint
from .gradcheck import grad_check
from .gru import BiGru, GruCell
from .layers import AvgPool2d, BatchNorm2d, Conv2d, ConvBlock, FreqPool, Linear, ReLU, TimePool
from .model import Crnn, CrnnConfig
from .params import Parameter
from .schedule import LR_ANCHORS, lr_schedule
from .transfer import replicate_first_layer

__all__ = [
    "Adam",
    "AvgPool2d",
    "BatchNorm2d",
    "BiGru",
    "Conv2d",
    "ConvBlock",
    "Crnn",
    "CrnnConfig",
    "FreqPool",
    "GruCell",
    "LR_ANCHORS",
    "Linear",
    "Parameter",
    "ReLU",
    "TimePool",
    "grad_check",
    "load_checkpoint",
    "lr_schedule",
    "replicate_first_layer",
    "restore_model",
    "save_checkpoint",
]
