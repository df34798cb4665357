"""Gesture classifier: labels, templates, datasets and a from-scratch MLP."""

from .data import (
    FEATURE_DIM,
    GestureDataset,
    GestureLabel,
    features_from_landmarks,
    gesture_template,
    generate_dataset,
    load_dataset,
    normalize_features,
    normalize_batch,
    save_dataset,
    split_dataset,
)
from .mlp import (
    DEFAULT_LAYER_SIZES,
    EpochStats,
    EvalReport,
    MlpModel,
    TrainConfig,
    evaluate,
    forward,
    init_model,
    loss_and_gradients,
    predict,
    train,
)
from .model_io import load_model, model_from_bytes, model_to_bytes, save_model

__all__ = [
    "DEFAULT_LAYER_SIZES",
    "FEATURE_DIM",
    "GestureDataset",
    "GestureLabel",
    "features_from_landmarks",
    "gesture_template",
    "generate_dataset",
    "load_dataset",
    "normalize_features",
    "normalize_batch",
    "save_dataset",
    "split_dataset",
    "EpochStats",
    "EvalReport",
    "MlpModel",
    "TrainConfig",
    "evaluate",
    "forward",
    "init_model",
    "loss_and_gradients",
    "predict",
    "train",
    "load_model",
    "model_from_bytes",
    "model_to_bytes",
    "save_model",
]
