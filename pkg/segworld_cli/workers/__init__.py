from .ablation_worker import ABLATION_VARIANTS, AblationWorker
from .evaluation_worker import EvaluationOutcome, EvaluationWorker, build_oracle_model
from .report_worker import ReportWorker
from .training_worker import TrainingWorker
from .worker_base import Worker

__all__ = [
    "ABLATION_VARIANTS",
    "AblationWorker",
    "EvaluationOutcome",
    "EvaluationWorker",
    "ReportWorker",
    "TrainingWorker",
    "Worker",
    "build_oracle_model",
]
