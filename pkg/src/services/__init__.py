from .training_service import TrainingService
from .synthesis_service import SynthesisService
from .evaluation_service import EvaluationService
from .ablation_service import (
    AblationService,
    CeleryRunExecutor,
    ExperimentMatrix,
    InlineRunExecutor,
    compare_methods,
    execute_run,
)

__all__ = [
    "TrainingService",
    "SynthesisService",
    "EvaluationService",
    "AblationService",
    "CeleryRunExecutor",
    "ExperimentMatrix",
    "InlineRunExecutor",
    "compare_methods",
    "execute_run",
]
