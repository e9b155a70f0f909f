"""GNN Trojan detector: featurization, per-HT GCN models, ensemble rule."""

from .ensemble import (
    Decision,
    Prediction,
    TrojanEnsemble,
    assemble_prediction,
)
from .features import (
    FEATURE_DIM,
    EmptyGraphError,
    GraphFeatures,
    featurize,
)
from .gcn import (
    ClassEmptyError,
    GcnModel,
    GcnParams,
    GcnTrojanClassifier,
    TrainConfig,
    TrainingDivergedError,
    TrainingMeta,
    accuracy,
    batch_loss,
    forward,
    init_params,
    loss_and_gradients,
    stratified_split,
    train,
)
from .model_io import (
    ModelFormatError,
    load_ensemble,
    load_model,
    save_ensemble,
    save_model,
    write_embeddings,
)

__all__ = [
    "ClassEmptyError",
    "Decision",
    "EmptyGraphError",
    "FEATURE_DIM",
    "GcnModel",
    "GcnParams",
    "GcnTrojanClassifier",
    "GraphFeatures",
    "ModelFormatError",
    "Prediction",
    "TrainConfig",
    "TrainingDivergedError",
    "TrainingMeta",
    "TrojanEnsemble",
    "accuracy",
    "assemble_prediction",
    "batch_loss",
    "featurize",
    "forward",
    "init_params",
    "load_ensemble",
    "load_model",
    "loss_and_gradients",
    "save_ensemble",
    "save_model",
    "stratified_split",
    "train",
    "write_embeddings",
]
