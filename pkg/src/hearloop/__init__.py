"""Closed-loop hearing-loss compensation through a differentiable auditory periphery."""

from hearloop._audio import calibrate, mix_at_snr, pad_context, read_wav, resample, write_wav
from hearloop._checkpoint import check_compatible, dumps, load_checkpoint, loads, save_checkpoint
from hearloop._config import EvalConfig, RunConfig, TrainConfig
from hearloop._dnnha import ARCHITECTURE_PRESETS, ArchSpec, ModelParams, build, forward, forward_windowed, param_count
from hearloop._errors import (
    ArchitectureMismatch,
    DataError,
    HearloopError,
    InvalidConfig,
    InvalidPath,
    NumericalError,
    ShapeMismatch,
    UnknownPreset,
)
from hearloop._evalkit import (
    EfrConfig,
    EvalReport,
    SamStimulus,
    efr,
    evaluate,
    level_sweep,
    nrmse,
    sam_tone,
    ssn_from_corpus,
)
from hearloop._losses import LossBundle, LossKind, LossSpec, LossTerm, compose
from hearloop._registry import (
    available_loss_presets,
    available_profiles,
    get_loss_preset,
    get_profile,
    register_loss_preset,
    register_profile,
)
from hearloop._rundir import RunDir
from hearloop._trainer import DatasetItem, TrainResult, add_noise_training, ingest, load_corpus, train

__version__ = "0.1.0"

__all__ = [
    # DNN-HA
    "ArchSpec",
    "ModelParams",
    "ARCHITECTURE_PRESETS",
    "build",
    "forward",
    "forward_windowed",
    "param_count",
    "dumps",
    "loads",
    "save_checkpoint",
    "load_checkpoint",
    "check_compatible",
    # Losses
    "LossKind",
    "LossTerm",
    "LossSpec",
    "LossBundle",
    "compose",
    # Training
    "DatasetItem",
    "TrainResult",
    "ingest",
    "load_corpus",
    "add_noise_training",
    "train",
    # Evaluation
    "nrmse",
    "level_sweep",
    "SamStimulus",
    "sam_tone",
    "EfrConfig",
    "efr",
    "ssn_from_corpus",
    "mix_at_snr",
    "EvalReport",
    "evaluate",
    # Audio
    "read_wav",
    "write_wav",
    "resample",
    "calibrate",
    "pad_context",
    # Config & registry
    "TrainConfig",
    "EvalConfig",
    "RunConfig",
    "RunDir",
    "register_profile",
    "register_loss_preset",
    "get_profile",
    "get_loss_preset",
    "available_profiles",
    "available_loss_presets",
    # Errors
    "HearloopError",
    "ShapeMismatch",
    "InvalidConfig",
    "UnknownPreset",
    "ArchitectureMismatch",
    "DataError",
    "NumericalError",
    "InvalidPath",
    # Version
    "__version__",
]
