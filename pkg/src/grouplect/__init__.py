"""Cost-constrained multi-label feature selection with feature groups."""
from .data_model import (
    Budget,
    Dataset,
    GroupStructure,
    IngestionError,
    SelectionTrace,
    Step,
    generate_illustrative,
    incremental_cost,
    load_dataset,
    load_groups,
    subset_cost,
    train_valid_split,
    zero_cost_pool,
)
from .evaluation import EvalReport, compute_metrics, evaluate_subset, fit_mlknn, predict
from .info_theory import (
    DiscretizedView,
    conditional_mi,
    discretize,
    entropy,
    interaction_information,
    mutual_information,
)
from .scoring import ScoreConfig, ShadowPool, make_shadow_pool, max_shadow_score, score_candidate
from .selection import (
    SelectionConfig,
    exhaustive_oracle,
    joint_relevance,
    lambda_max,
    proposed_select,
    sfs_penalized,
)

__version__ = "0.1.0"
