"""Negative-sampling NLL training.

The loss over a batch of observed triples is

    L = -sum_pos [ log sigmoid(phi(pos)) + sum_neg log(1 - sigmoid(phi(neg))) ]

with m uniformly drawn corruptions per positive: m/2 head and m/2 tail
replacements, or all m on the tail when reversed-triple augmentation is on
(the reversed triples already cover the head direction, so the head-corruption
term is dropped; this coupling is enforced).

Gradients are exact, hand-derived chain-rule expressions through the score
pipeline, accumulated sparsely into a tape that only touches rows referenced
by the batch.  Optimizers: plain SGD, Adam with bias-corrected moments, and
SM3 with row/column cover sets over the coordinate table and per-coordinate
accumulators everywhere else.  The loop shuffles each epoch from the run
seed, evaluates filtered MRR on the validation split every few epochs and
early-stops on it, returning the best checkpoint seen.
"""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .likelihood import sigmoid, softplus
from .model import ModelParams, _forward, init as model_init, InitConfig
from .relmaps import Variant

__all__ = [
    "OptimizerKind",
    "NegativeMode",
    "TrainConfig",
    "GradientTape",
    "DivergenceError",
    "augment_reverse",
    "sample_negatives",
    "sample_negatives_batch",
    "nll_from_scores",
    "nll_loss",
    "gradients",
    "SgdOptimizer",
    "AdamOptimizer",
    "Sm3Optimizer",
    "make_optimizer",
    "train",
    "TrainLogRow",
    "write_log_csv",
]

logger = logging.getLogger(__name__)


class OptimizerKind(str, Enum):
    SGD = "sgd"
    ADAM = "adam"
    SM3 = "sm3"


class NegativeMode(str, Enum):
    TAIL_ONLY = "tail_only"
    BOTH = "both"


class DivergenceError(RuntimeError):
    """Raised when the loss goes non-finite during training."""


@dataclass(frozen=True)
class TrainConfig:
    """Knobs of the minibatch loop.

    m_negatives must be even (half head, half tail corruptions in BOTH mode).
    With augment_reverse the corruption mode is forced to tail-only.
    """

    m_negatives: int = 10
    batch_size: int = 128
    learning_rate: float = 1e-3
    optimizer: OptimizerKind = OptimizerKind.ADAM
    max_epochs: int = 200
    eval_every: int = 5
    patience: int = 10
    augment_reverse: bool = False
    seed: int = 0

    def __post_init__(self) -> None:
        if self.m_negatives <= 0 or self.m_negatives % 2 != 0:
            raise ValueError(f"m_negatives must be a positive even integer, got {self.m_negatives}")
        for name in ("batch_size", "max_epochs", "eval_every", "patience"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")

    @property
    def negative_mode(self) -> NegativeMode:
        return NegativeMode.TAIL_ONLY if self.augment_reverse else NegativeMode.BOTH


@dataclass
class GradientTape:
    """Dense gradient accumulators matching the ModelParams layout.

    Rows not referenced by the batch stay exactly zero; ``touched_entities``
    and ``touched_relations`` list the referenced rows so optimizers can
    update only those.
    """

    coords: np.ndarray
    node_bias: np.ndarray
    rel_u: np.ndarray
    rel_r: np.ndarray
    rel_h: np.ndarray
    rel_c: np.ndarray
    touched_entities: np.ndarray
    touched_relations: np.ndarray

    @classmethod
    def zeros_like(cls, params: ModelParams) -> "GradientTape":
        return cls(
            coords=np.zeros_like(params.coords),
            node_bias=np.zeros_like(params.node_bias),
            rel_u=np.zeros_like(params.rel_u),
            rel_r=np.zeros_like(params.rel_r),
            rel_h=np.zeros_like(params.rel_h),
            rel_c=np.zeros_like(params.rel_c),
            touched_entities=np.empty(0, dtype=np.intp),
            touched_relations=np.empty(0, dtype=np.intp),
        )


def augment_reverse(triples: np.ndarray, n_relations: int) -> np.ndarray:
    """Append (tail, k + n_relations, head) for every (head, k, tail); output doubles."""
    triples = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
    reversed_ = np.column_stack([triples[:, 2], triples[:, 1] + n_relations, triples[:, 0]])
    return np.concatenate([triples, reversed_], axis=0)


def sample_negatives_batch(
    batch: np.ndarray, m: int, mode: NegativeMode, rng: np.random.Generator, n_entities: int
) -> np.ndarray:
    """Corrupted triples, shape (B, m, 3).

    Replacements are uniform over the whole entity vocabulary, sampled
    independently; duplicates and accidental true triples are allowed.
    BOTH mode corrupts the tail in the first m/2 slots and the head in the
    rest; TAIL_ONLY corrupts the tail in all m.
    """
    if m % 2 != 0 or m < 0:
        raise ValueError(f"m must be a non-negative even integer, got {m}")
    batch = np.asarray(batch, dtype=np.int64).reshape(-1, 3)
    b = batch.shape[0]
    out = np.repeat(batch[:, None, :], m, axis=1) if m else np.empty((b, 0, 3), dtype=np.int64)
    if m == 0:
        return out
    draws = rng.integers(0, n_entities, size=(b, m))
    if mode is NegativeMode.TAIL_ONLY:
        out[:, :, 2] = draws
    else:
        half = m // 2
        out[:, :half, 2] = draws[:, :half]
        out[:, half:, 0] = draws[:, half:]
    return out


def sample_negatives(triple, m: int, mode: NegativeMode, rng: np.random.Generator, n_entities: int):
    """Corruptions of a single triple, as a list of (head, rel, tail) tuples."""
    block = sample_negatives_batch(np.asarray(triple).reshape(1, 3), m, mode, rng, n_entities)
    return [tuple(int(v) for v in row) for row in block[0]]


def nll_from_scores(pos_scores: np.ndarray, neg_scores: np.ndarray) -> float:
    """-sum log sigmoid(pos) - sum log(1 - sigmoid(neg)), in stable softplus form."""
    return float(np.sum(softplus(-np.asarray(pos_scores))) + np.sum(softplus(np.asarray(neg_scores))))


def nll_loss(params: ModelParams, batch: np.ndarray, negatives: np.ndarray) -> float:
    """Batch negative log-likelihood; ``negatives`` has shape (B, m, 3)."""
    batch = np.asarray(batch, dtype=np.int64).reshape(-1, 3)
    negatives = np.asarray(negatives, dtype=np.int64).reshape(-1, 3)
    pos = _forward(params, batch[:, 0], batch[:, 1], batch[:, 2]).phi
    if negatives.size:
        neg = _forward(params, negatives[:, 0], negatives[:, 1], negatives[:, 2]).phi
    else:
        neg = np.empty(0)
    return nll_from_scores(pos, neg)


def gradients(params: ModelParams, batch: np.ndarray, negatives: np.ndarray) -> GradientTape:
    """Exact gradient of :func:`nll_loss` with respect to every trainable parameter.

    Positives and negatives share one backward pass: the gradient of the loss
    with respect to each score is sigmoid(phi) - label.
    """
    return _loss_and_gradients(params, batch, negatives)[1]


def _loss_and_gradients(
    params: ModelParams, batch: np.ndarray, negatives: np.ndarray
) -> tuple[float, GradientTape]:
    batch = np.asarray(batch, dtype=np.int64).reshape(-1, 3)
    negatives = np.asarray(negatives, dtype=np.int64).reshape(-1, 3)
    triples = np.concatenate([batch, negatives], axis=0)
    labels = np.zeros(triples.shape[0])
    labels[: batch.shape[0]] = 1.0

    cache = _forward(params, triples[:, 0], triples[:, 1], triples[:, 2])
    if not np.all(np.isfinite(cache.phi)):
        bad = int(np.flatnonzero(~np.isfinite(cache.phi))[0])
        raise DivergenceError(f"non-finite score for triple {tuple(int(v) for v in triples[bad])}")
    # softplus(-phi) for positives, softplus(phi) for negatives
    loss = float(np.sum(softplus((1.0 - 2.0 * labels) * cache.phi)))
    dphi = sigmoid(cache.phi) - labels

    tape = GradientTape.zeros_like(params)
    heads, rels, tails = cache.heads, cache.rels, cache.tails
    tfd = params.tfd
    n_t = params.n_t

    # Bias terms enter the score additively.
    np.add.at(tape.node_bias, heads, dphi)
    np.add.at(tape.node_bias, tails, dphi)
    np.add.at(tape.rel_c, rels, dphi)

    # Through the logit and the beta-mix into the three FD factors.
    dlogp = dphi * cache.dphi_dlogp
    w_tfd = (1.0 - tfd.beta) / 3.0
    ds2 = dlogp * w_tfd * (-cache.sig1 / tfd.tau1)
    ds2w = dlogp * tfd.beta * (-cache.sigw / tfd.tau1)
    ddt = (
        dlogp * w_tfd * (tfd.alpha * cache.sig2 - tfd.alpha_prime * cache.sig3) / tfd.tau2
        + (ds2w - ds2) * 2.0 * cache.dt
    )
    ddx = ((ds2 + ds2w) * 2.0)[:, None] * cache.dx

    # Through the relation maps into coordinates and relation tables.
    t_h = params.coords[heads, :n_t]
    t_t = params.coords[tails, :n_t]
    x_h = params.coords[heads, n_t:]
    x_t = params.coords[tails, n_t:]
    h = params.rel_h[rels]
    r_t = params.rel_r[rels, 0]
    r_x = params.rel_r[rels, 1:]

    if params.swap_transforms:
        # dt = r_t*(h.t_h) - (h.t_t + u_t); dx = r_x*x_h - (x_t + u_x)
        d_th = (ddt * r_t)[:, None] * h
        d_tt = (-ddt)[:, None] * h
        d_xh = ddx * r_x
        d_xt = -ddx
        d_ut = -ddt
        d_ux = -ddx
        d_rt = ddt * cache.t_head_proj
        d_rx = ddx * x_h
        d_h = (ddt * r_t)[:, None] * t_h - ddt[:, None] * t_t
    else:
        # dt = (h.t_h + u_t) - r_t*(h.t_t); dx = (x_h + u_x) - r_x*x_t
        d_th = ddt[:, None] * h
        d_tt = (-ddt * r_t)[:, None] * h
        d_xh = ddx
        d_xt = -ddx * r_x
        d_ut = ddt
        d_ux = ddx
        d_rt = -ddt * cache.t_tail_proj
        d_rx = -ddx * x_t
        d_h = ddt[:, None] * t_h - (ddt * r_t)[:, None] * t_t

    np.add.at(tape.coords, heads, np.concatenate([d_th, d_xh], axis=1))
    np.add.at(tape.coords, tails, np.concatenate([d_tt, d_xt], axis=1))
    np.add.at(tape.rel_u, rels, np.concatenate([d_ut[:, None], d_ux], axis=1))
    np.add.at(tape.rel_r, rels, np.concatenate([d_rt[:, None], d_rx], axis=1))
    np.add.at(tape.rel_h, rels, d_h)

    # Tables frozen by the variant receive no gradient.
    if params.variant is Variant.MT:
        tape.rel_u[:] = 0.0
        tape.rel_r[:] = 0.0
    elif params.variant is Variant.DT:
        tape.rel_h[:] = 0.0

    tape.touched_entities = np.unique(np.concatenate([heads, tails]))
    tape.touched_relations = np.unique(rels)
    return loss, tape


# --- optimizers --------------------------------------------------------------


class SgdOptimizer:
    """param -= lr * grad over touched rows."""

    def __init__(self, params: ModelParams, learning_rate: float):
        self.lr = learning_rate

    def step(self, params: ModelParams, tape: GradientTape) -> None:
        for name, rows in _update_plan(tape):
            getattr(params, name)[rows] -= self.lr * getattr(tape, name)[rows]


class AdamOptimizer:
    """Adam with bias-corrected moments, applied lazily to touched rows only.

    Each row keeps its own step count so bias correction stays exact for
    rows that enter training late.
    """

    def __init__(self, params: ModelParams, learning_rate: float, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = learning_rate, beta1, beta2, eps
        self.m = {n: np.zeros_like(getattr(params, n)) for n in _PARAM_FIELDS}
        self.v = {n: np.zeros_like(getattr(params, n)) for n in _PARAM_FIELDS}
        self.t = {n: np.zeros(getattr(params, n).shape[0], dtype=np.int64) for n in _PARAM_FIELDS}

    def step(self, params: ModelParams, tape: GradientTape) -> None:
        for name, rows in _update_plan(tape):
            if rows.size == 0:
                continue
            g = getattr(tape, name)[rows]
            self.t[name][rows] += 1
            t = self.t[name][rows].astype(np.float64)
            m = self.m[name][rows] = self.beta1 * self.m[name][rows] + (1 - self.beta1) * g
            v = self.v[name][rows] = self.beta2 * self.v[name][rows] + (1 - self.beta2) * g * g
            c1 = 1.0 - self.beta1**t
            c2 = 1.0 - self.beta2**t
            if g.ndim == 2:
                c1, c2 = c1[:, None], c2[:, None]
            getattr(params, name)[rows] -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


class Sm3Optimizer:
    """SM3 with row and column cover sets over the coordinate table.

    Every other parameter gets per-coordinate accumulators, which reduces to
    Adagrad for those tables.  Accumulators are monotone non-decreasing per
    cover set and updates stay on touched rows.
    """

    def __init__(self, params: ModelParams, learning_rate: float):
        self.lr = learning_rate
        self.coord_row = np.zeros(params.coords.shape[0])
        self.coord_col = np.zeros(params.coords.shape[1])
        self.acc = {n: np.zeros_like(getattr(params, n)) for n in _PARAM_FIELDS if n != "coords"}

    def step(self, params: ModelParams, tape: GradientTape) -> None:
        rows = tape.touched_entities
        if rows.size:
            g = tape.coords[rows]
            nu = np.minimum(self.coord_row[rows, None], self.coord_col[None, :]) + g * g
            with np.errstate(divide="ignore", invalid="ignore"):
                upd = np.where(nu > 0.0, g / np.sqrt(nu), 0.0)
            params.coords[rows] -= self.lr * upd
            self.coord_row[rows] = nu.max(axis=1)
            self.coord_col = np.maximum(self.coord_col, nu.max(axis=0))
        for name, idx in _update_plan(tape):
            if name == "coords" or idx.size == 0:
                continue
            g = getattr(tape, name)[idx]
            nu = self.acc[name][idx] + g * g
            with np.errstate(divide="ignore", invalid="ignore"):
                upd = np.where(nu > 0.0, g / np.sqrt(nu), 0.0)
            getattr(params, name)[idx] -= self.lr * upd
            self.acc[name][idx] = nu


_PARAM_FIELDS = ("coords", "node_bias", "rel_u", "rel_r", "rel_h", "rel_c")


def _update_plan(tape: GradientTape):
    ents, rels = tape.touched_entities, tape.touched_relations
    return (
        ("coords", ents),
        ("node_bias", ents),
        ("rel_u", rels),
        ("rel_r", rels),
        ("rel_h", rels),
        ("rel_c", rels),
    )


def make_optimizer(kind: OptimizerKind, params: ModelParams, learning_rate: float):
    if kind is OptimizerKind.SGD:
        return SgdOptimizer(params, learning_rate)
    if kind is OptimizerKind.ADAM:
        return AdamOptimizer(params, learning_rate)
    return Sm3Optimizer(params, learning_rate)


# --- training loop ------------------------------------------------------------


@dataclass
class TrainLogRow:
    epoch: int
    mean_loss: float
    val_mrr: float | None
    val_hits10: float | None
    wall_seconds: float


def write_log_csv(log: list[TrainLogRow], path) -> None:
    """Training log as CSV: epoch, mean_loss, val_mrr, val_hits10, wall_seconds."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["epoch", "mean_loss", "val_mrr", "val_hits10", "wall_seconds"])
        for row in log:
            w.writerow(
                [
                    row.epoch,
                    f"{row.mean_loss:.10g}",
                    "" if row.val_mrr is None else f"{row.val_mrr:.10g}",
                    "" if row.val_hits10 is None else f"{row.val_hits10:.10g}",
                    f"{row.wall_seconds:.3f}",
                ]
            )


def train(
    store,
    config: TrainConfig,
    geometry,
    tfd,
    variant: Variant,
    init_cfg: InitConfig | None = None,
    protocol=None,
    swap_transforms: bool = False,
) -> tuple[ModelParams, list[TrainLogRow]]:
    """Minibatch training with periodic validation and early stopping.

    ``store`` is a TripleStore; with ``config.augment_reverse`` its augmented
    view (reversed triples, doubled relation vocabulary) is trained on and
    negatives corrupt tails only.  Validation MRR is computed every
    ``eval_every`` epochs under ``protocol`` (filtered ranking against the
    full vocabulary by default) and the best checkpoint is returned together
    with the per-epoch log.
    """
    from . import evaluation
    from .data import augmented_store

    if config.augment_reverse:
        store = augmented_store(store)
    train_triples = store.splits["train"]
    valid_triples = store.splits["valid"]
    if protocol is None:
        protocol = evaluation.EvalProtocol()

    seeds = np.random.SeedSequence(config.seed).spawn(2)
    if init_cfg is None:
        init_cfg = InitConfig(sigma_init=0.02, seed=int(seeds[0].generate_state(1)[0]))
    rng = np.random.default_rng(seeds[1])

    params = model_init(
        store.n_entities,
        store.n_relations,
        geometry,
        variant,
        init_cfg,
        tfd=tfd,
        swap_transforms=swap_transforms,
    )
    optimizer = make_optimizer(config.optimizer, params, config.learning_rate)

    best = params.copy()
    best_mrr = -np.inf
    rounds_without_improvement = 0
    log: list[TrainLogRow] = []
    t0 = time.perf_counter()

    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(train_triples.shape[0])
        total_loss = 0.0
        for start in range(0, order.size, config.batch_size):
            batch = train_triples[order[start : start + config.batch_size]]
            negs = sample_negatives_batch(
                batch, config.m_negatives, config.negative_mode, rng, store.n_entities
            )
            loss, tape = _loss_and_gradients(params, batch, negs)
            total_loss += loss
            optimizer.step(params, tape)
        mean_loss = total_loss / train_triples.shape[0]
        if not np.isfinite(mean_loss):
            raise DivergenceError(f"epoch {epoch}: mean loss is {mean_loss}")

        val_mrr = val_hits10 = None
        if epoch % config.eval_every == 0 or epoch == config.max_epochs:
            report = evaluation.evaluate_split(params, valid_triples, store.filter_index, protocol)
            val_mrr, val_hits10 = report.mrr, report.hits_at.get(10)
            if val_mrr > best_mrr:
                best_mrr = val_mrr
                best = params.copy()
                rounds_without_improvement = 0
            else:
                rounds_without_improvement += 1
        log.append(TrainLogRow(epoch, mean_loss, val_mrr, val_hits10, time.perf_counter() - t0))
        if val_mrr is not None:
            logger.info("epoch %d: loss %.4f, val MRR %.4f", epoch, mean_loss, val_mrr)
        if rounds_without_improvement >= config.patience:
            logger.info("early stop at epoch %d (best val MRR %.4f)", epoch, best_mrr)
            break

    if not np.isfinite(best_mrr):
        best = params.copy()
    return best, log
