"""Multi-relational graph embeddings on flat spacetime manifolds.

Entities live on a flat pseudo-Riemannian manifold with n_t time and n_x
space dimensions; edge probabilities come from a triple Fermi-Dirac
likelihood over (projected, transformed) point pairs, optionally blended
with its Wick-rotated Euclidean counterpart, plus node and relation biases.
"""

from .geometry import (
    GeometryConfig,
    Signature,
    SpacetimePoint,
    squared_interval,
    wick_rotate_metric,
    wick_squared_distance,
    wrap_time,
)
from .likelihood import TfdParams, log_fd, log_interpolated, log_tfd, logit_from_log
from .model import (
    InitConfig,
    ModelParams,
    init,
    load_checkpoint,
    probability,
    save_checkpoint,
    scale_node_bias,
    score,
    score_distmult,
    score_many,
    score_tails,
    score_transe,
)
from .relmaps import ProjectedPoint, RelationParams, Variant, scale_tail, time_project, transform_pair, translate_head
from .training import TrainConfig, train
from .evaluation import EvalMode, EvalProtocol, RankReport, aggregate, beta_sweep, evaluate_split, filtered_rank
from .data import NegativesTable, TripleStore, build_store, load_dataset, load_negatives, load_triples

__version__ = "0.1.0"
