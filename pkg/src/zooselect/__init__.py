"""Budgeted selection of pretrained models via cheap proxies on frozen embeddings."""

from .catalog import (
    BUILTIN_POOLS,
    ModelCatalog,
    ModelRecord,
    Pool,
    PoolSpec,
    RESNET50_PARAM_LIMIT,
    TaskCatalog,
    TaskRecord,
    build_pool,
    builtin_pool,
    load_model_manifest,
    load_task_manifest,
    save_model_manifest,
    save_task_manifest,
)
from .metrics import (
    BudgetCurve,
    RegretRow,
    absolute_regret,
    achieved_value,
    budget_curve,
    budget_to_zero_regret,
    correlation_limit_demo,
    knn_dim_correlation,
    log_odds_delta,
    log_relative_delta,
    oracle_value,
    pearson,
    regret_row,
    relative_delta,
    relative_regret,
)
from .proxy import (
    KnnConfig,
    LinearEvalConfig,
    ScorePoolResult,
    config_digest,
    knn_eval,
    linear_eval,
    score_pool,
)
from .store import (
    AccuracyTable,
    DataStore,
    EmbeddingMatrix,
    ProxyScoreTable,
    embedding_file_size,
    load_accuracy_csv,
    load_embedding,
    load_proxy_csv,
    save_accuracy_csv,
    save_embedding,
    save_proxy_csv,
)
from .strategy import (
    Ranking,
    STRATEGY_IDS,
    Selection,
    rank_hybrid,
    rank_oracle_task_agnostic,
    rank_task_agnostic,
    rank_task_aware,
    save_selections,
    select_hybrid,
    select_top,
)
from .synth import SynthConfig, SynthDesign, design, generate

__version__ = "0.1.0"
