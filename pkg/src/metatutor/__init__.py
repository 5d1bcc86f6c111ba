"""Simulated logic-tutor cohorts, offline Double-DQN intervention policies,
and the surrounding analysis toolkit."""

from .domain import (
    Action,
    Dataset,
    FeatureSchema,
    MetacognitiveGroup,
    StudentState,
    Transition,
    load_dataset,
    split_dataset,
    store_dataset,
    validate_transition,
)
from .learner import Hyperparams, QNetwork, TrainedModel, train
from .tutor_sim import (
    Curriculum,
    SessionLog,
    StudentProfile,
    default_profile,
    generate_synthetic_dataset,
    run_curriculum,
)

__all__ = [
    "Action",
    "Curriculum",
    "Dataset",
    "FeatureSchema",
    "Hyperparams",
    "MetacognitiveGroup",
    "QNetwork",
    "SessionLog",
    "StudentProfile",
    "StudentState",
    "TrainedModel",
    "Transition",
    "default_profile",
    "generate_synthetic_dataset",
    "load_dataset",
    "run_curriculum",
    "split_dataset",
    "store_dataset",
    "train",
    "validate_transition",
]
