"""Domain objects for the LPCMCI engine.

This module exports the graph types, ground-truth models, run configurations
and score containers. These are pure objects with invariant validation and
no I/O dependencies.
"""

from src.core.domain.discovery_config import DiscoveryConfig, Method, RuleId
from src.core.domain.discovery_state import DiscoveryState
from src.core.domain.experiment_config import ExperimentCell, ExperimentConfig
from src.core.domain.graph import (
    Edge,
    EndMark,
    LinkClass,
    MiddleMark,
    NodeRef,
    TimeOrderError,
    WindowGraph,
)
from src.core.domain.ground_truth import (
    GroundTruthGraph,
    GroundTruthModel,
    Link,
    LinkFunction,
    NoiseDist,
    NoiseSpec,
    majority_counterexample_model,
    motivational_model,
)
from src.core.domain.metrics import ClassCounts, Metrics
from src.core.domain.model_config import ModelConfig, ModelKind
from src.core.domain.sepsets import SepSetLookupError, SepSetStore

__all__ = [
    # Graph
    "NodeRef",
    "Edge",
    "EndMark",
    "MiddleMark",
    "LinkClass",
    "WindowGraph",
    "TimeOrderError",
    # Ground truth
    "Link",
    "LinkFunction",
    "NoiseDist",
    "NoiseSpec",
    "GroundTruthGraph",
    "GroundTruthModel",
    "motivational_model",
    "majority_counterexample_model",
    # Discovery
    "DiscoveryConfig",
    "DiscoveryState",
    "Method",
    "RuleId",
    "SepSetStore",
    "SepSetLookupError",
    # Simulation and benchmark
    "ModelConfig",
    "ModelKind",
    "ExperimentCell",
    "ExperimentConfig",
    "ClassCounts",
    "Metrics",
]
