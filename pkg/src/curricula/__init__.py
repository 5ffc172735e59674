"""Curriculum-learning research toolkit for small classifiers.

Trains deterministic MLP classifiers while tracing per-sample learning
dynamics, derives model-based sample-difficulty scores (and ensembles
and orderings of them), schedules curriculum / anti-curriculum / random
training with four pacing families, and analyses robustness, agreement,
granularity, and late fusion.
"""

from .analysis import (
    CorrelationReport,
    GranularityReport,
    granularity,
    late_fuse,
    pairwise_report,
    pearson,
    robustness_vs_ensemble,
    spearman,
)
from .checkpoint import load_state, save_state
from .curriculum import CurriculumRun, curriculum_train, subset_target
from .data import Dataset, KFoldSpec, PlantedSpec, generate_planted, kfold_partitions, load_csv, stratified_split
from .depth import ProbeSpec, score_pd
from .kernels import BACKEND as KERNEL_BACKEND
from .model import LayerActivations, ModelSpec, ModelState, forward, init_model, loss_and_grad
from .optim import Optimizer, OptimizerSpec, optimizer_step
from .pacing import PacingSpec, pacing_fraction
from .scoring import (
    CScoreSpec,
    DifficultyOrdering,
    DifficultyScores,
    build_ensemble,
    make_ordering,
    random_ordering,
    reverse_ordering,
    score_celoss,
    score_cscore,
    score_cumacc,
    score_cvloss,
    score_fit,
)
from .svc import SvcSpec, score_tt
from .training import RunRecord, TrainConfig, TrainingTrace, epoch_order, evaluate, train

__version__ = "0.1.0"
