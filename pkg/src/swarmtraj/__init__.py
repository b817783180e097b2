"""UAV swarm trajectory prediction and deconfliction toolkit."""

from .activations import ACTIVATION_KINDS, ActivationSpec, batch_evaluate, derivative, evaluate
from .icdab import DeconflictionReport, IcdabConfig, detect_all, run_pipeline
from .metrics import MetricResult, aggregate, compute_all
from .network import NetworkParams, NetworkShape, TrainedModel, forward, init_params, jacobian
from .swarm import GenConfig, SwarmDataset, Trajectory, generate
from .training import NumericError, TrainConfig, TrainReport, lm_step, split_dataset, train

__version__ = "0.1.0"

__all__ = [
    "ACTIVATION_KINDS",
    "ActivationSpec",
    "DeconflictionReport",
    "GenConfig",
    "IcdabConfig",
    "MetricResult",
    "NetworkParams",
    "NetworkShape",
    "NumericError",
    "SwarmDataset",
    "TrainConfig",
    "TrainReport",
    "TrainedModel",
    "Trajectory",
    "aggregate",
    "batch_evaluate",
    "compute_all",
    "derivative",
    "detect_all",
    "evaluate",
    "forward",
    "generate",
    "init_params",
    "jacobian",
    "lm_step",
    "run_pipeline",
    "split_dataset",
    "train",
]
