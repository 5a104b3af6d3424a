"""From-scratch neural network engine: dense and bidirectional LSTM stacks,
analytic gradients, scaled conjugate gradient and momentum SGD training."""

from .activations import LEAKY_SLOPE, sigmoid, softmax
from .lstm import (
    LstmStackSpec,
    bilstm_forward,
    bilstm_loss_gradient,
    clip_global_norm,
    init_lstm_stack,
)
from .mlp import MlpSpec, init_mlp, mlp_forward, mlp_loss_gradient, mlp_objective
from .model_io import NetworkModel, load_model, make_layout, save_model
from .scg import ScgResult, TrainingDivergedError, scg_minimize
from .sgdm import SgdmSchedule, sgdm_minimize

__all__ = [
    "LEAKY_SLOPE",
    "LstmStackSpec",
    "MlpSpec",
    "NetworkModel",
    "ScgResult",
    "SgdmSchedule",
    "TrainingDivergedError",
    "bilstm_forward",
    "bilstm_loss_gradient",
    "clip_global_norm",
    "init_lstm_stack",
    "init_mlp",
    "load_model",
    "make_layout",
    "mlp_forward",
    "mlp_loss_gradient",
    "mlp_objective",
    "save_model",
    "scg_minimize",
    "sgdm_minimize",
    "sigmoid",
    "softmax",
]
