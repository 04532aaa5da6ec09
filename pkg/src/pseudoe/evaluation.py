"""Filtered ranking evaluation: MRR, hits@k, per-relation breakdowns, beta sweeps.

Each test triple is ranked by scoring its true tail against candidate tails.
Under the full filtered protocol the candidates are every entity except those
forming a known true triple (other than the test triple itself); under the
fixed-negatives protocol they are a stored per-(head, relation) candidate
list.  Ties share their rank: rank = 1 + #{better} + #{equal}/2, so a
constant scorer earns mid-range ranks rather than rank 1.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .model import ModelParams, score_tails
from .data import NegativesTable

__all__ = [
    "EvalMode",
    "EvalProtocol",
    "ProtocolError",
    "RelationStats",
    "RankReport",
    "filtered_rank",
    "aggregate",
    "evaluate_split",
    "beta_sweep",
    "write_report_csv",
    "format_report",
    "write_sweep_csv",
]


class EvalMode(str, Enum):
    FULL_FILTERED = "full"
    FIXED_NEGATIVES = "fixed"


class ProtocolError(ValueError):
    """Evaluation asked for data the protocol does not carry."""


@dataclass(frozen=True)
class EvalProtocol:
    """How candidates are chosen and which hits@k cutoffs are reported."""

    mode: EvalMode = EvalMode.FULL_FILTERED
    ks: tuple[int, ...] = (1, 3, 10)
    negatives: NegativesTable | None = None

    def __post_init__(self) -> None:
        if self.mode is EvalMode.FIXED_NEGATIVES and self.negatives is None:
            raise ProtocolError("fixed-negatives evaluation requires a negatives table")


@dataclass
class RelationStats:
    mrr: float
    hits: dict[int, float]
    count: int


@dataclass
class RankReport:
    """Per-triple filtered ranks plus their aggregates."""

    per_triple_ranks: list[tuple[tuple[int, int, int], float]]
    mrr: float
    hits_at: dict[int, float]
    per_relation: dict[int, RelationStats] = field(default_factory=dict)


def _rank_from_scores(candidate_scores: np.ndarray, true_score: float) -> float:
    """Average-tie rank of the true score among competitor scores."""
    better = int(np.sum(candidate_scores > true_score))
    equal = int(np.sum(candidate_scores == true_score))
    return 1.0 + better + 0.5 * equal


def _competitor_scores(params, triple, protocol, true_tails_by_key):
    h, k, t = (int(v) for v in triple)
    if protocol.mode is EvalMode.FIXED_NEGATIVES:
        entry = protocol.negatives.table.get((h, k))
        if entry is None:
            raise ProtocolError(f"no fixed negatives stored for head={h}, relation={k}")
        candidates = entry
    else:
        known = true_tails_by_key.get((h, k), ())
        mask = np.ones(params.n_entities, dtype=bool)
        mask[list(known)] = False
        mask[t] = False  # the true triple is never its own competitor
        candidates = np.flatnonzero(mask)
    scores = score_tails(params, h, k, candidates) if len(candidates) else np.empty(0)
    true_score = float(score_tails(params, h, k, np.asarray([t]))[0])
    return scores, true_score


def filtered_rank(params: ModelParams, triple, filter_set, protocol: EvalProtocol) -> float:
    """Filtered average-tie rank of one triple's true tail.

    ``filter_set`` holds every known true triple across all splits; candidate
    tails forming one of them (other than the test triple itself) are
    excluded in full-filtered mode and ignored in fixed-negatives mode.
    """
    scores, true_score = _competitor_scores(params, triple, protocol, _tails_by_key(filter_set))
    return _rank_from_scores(scores, true_score)


def _tails_by_key(filter_set) -> dict[tuple[int, int], set[int]]:
    by_key: dict[tuple[int, int], set[int]] = defaultdict(set)
    for h, k, t in filter_set:
        by_key[(h, k)].add(t)
    return by_key


def aggregate(ranks, ks=(1, 3, 10)) -> RankReport:
    """MRR, hits@k and per-relation breakdown from (triple, rank) pairs."""
    ranks = list(ranks)
    if not ranks:
        raise ValueError("cannot aggregate an empty rank list")
    values = np.asarray([r for _, r in ranks], dtype=np.float64)
    recip = 1.0 / values
    report = RankReport(
        per_triple_ranks=ranks,
        mrr=float(recip.mean()),
        hits_at={k: float(np.mean(values <= k)) for k in ks},
    )
    by_rel: dict[int, list[float]] = defaultdict(list)
    for (h, k, t), r in ranks:
        by_rel[int(k)].append(r)
    for k, rel_ranks in sorted(by_rel.items()):
        arr = np.asarray(rel_ranks)
        report.per_relation[k] = RelationStats(
            mrr=float(np.mean(1.0 / arr)),
            hits={c: float(np.mean(arr <= c)) for c in ks},
            count=arr.size,
        )
    return report


def evaluate_split(
    params: ModelParams,
    split: np.ndarray,
    filter_set,
    protocol: EvalProtocol | None = None,
    threads: int = 1,
) -> RankReport:
    """Rank every triple of a split and aggregate.

    Parallelism (``threads`` > 1) splits the triples across worker threads
    over the read-only parameters; ranks are merged in triple order so the
    report does not depend on scheduling.
    """
    protocol = protocol or EvalProtocol()
    split = np.asarray(split, dtype=np.int64).reshape(-1, 3)
    by_key = _tails_by_key(filter_set) if protocol.mode is EvalMode.FULL_FILTERED else {}

    def rank_row(row):
        scores, true_score = _competitor_scores(params, row, protocol, by_key)
        return _rank_from_scores(scores, true_score)

    if threads > 1 and split.shape[0] > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(rank_row, split))
    else:
        values = [rank_row(row) for row in split]
    pairs = [(tuple(int(v) for v in row), rank) for row, rank in zip(split, values)]
    return aggregate(pairs, protocol.ks)


def beta_sweep(
    params: ModelParams,
    split: np.ndarray,
    filter_set,
    betas,
    protocol: EvalProtocol | None = None,
    retrain=None,
    repeats: int = 1,
    threads: int = 1,
) -> list[tuple[float, int, float, float]]:
    """Per-relation MRR as the mixing weight beta varies.

    By default each beta point rescores the given trained parameters with
    only the mixing weight replaced; passing ``retrain`` (a callable
    ``retrain(beta, repeat_index) -> ModelParams``) trains fresh parameters
    per point instead.  Rows are (beta, relation, mean MRR, across-repeat
    standard deviation); the deviation is 0 when repeats == 1.
    """
    rows: list[tuple[float, int, float, float]] = []
    for beta in betas:
        if not 0.0 <= beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {beta}")
        per_rel: dict[int, list[float]] = defaultdict(list)
        for rep in range(repeats):
            if retrain is not None:
                p = retrain(beta, rep)
            else:
                p = replace(params, tfd=replace(params.tfd, beta=float(beta)))
            report = evaluate_split(p, split, filter_set, protocol, threads=threads)
            for rel, stats in report.per_relation.items():
                per_rel[rel].append(stats.mrr)
        for rel, mrrs in sorted(per_rel.items()):
            arr = np.asarray(mrrs)
            sd = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
            rows.append((float(beta), rel, float(arr.mean()), sd))
    return rows


def format_report(report: RankReport, relation_names=None, per_relation: bool = False) -> str:
    """Human-readable metrics table."""
    ks = sorted(report.hits_at)
    lines = ["triples  mrr      " + "  ".join(f"hits@{k:<4d}" for k in ks)]
    hits = "  ".join(f"{report.hits_at[k]:<9.4f}" for k in ks)
    lines.append(f"{len(report.per_triple_ranks):<8d} {report.mrr:<8.4f} {hits}")
    if per_relation:
        lines.append("")
        lines.append("relation                         count  mrr      hits@10")
        for rel, stats in report.per_relation.items():
            name = relation_names(rel) if relation_names else str(rel)
            lines.append(f"{name:<32s} {stats.count:<6d} {stats.mrr:<8.4f} {stats.hits.get(10, float('nan')):.4f}")
    return "\n".join(lines)


def write_report_csv(report: RankReport, path, relation_names=None) -> None:
    """CSV with one ALL row plus one row per relation: relation, count, mrr, hits1, hits3, hits10."""
    ks = sorted(report.hits_at)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["relation", "count", "mrr"] + [f"hits{k}" for k in ks])
        w.writerow(
            ["ALL", len(report.per_triple_ranks), f"{report.mrr:.10g}"]
            + [f"{report.hits_at[k]:.10g}" for k in ks]
        )
        for rel, stats in report.per_relation.items():
            name = relation_names(rel) if relation_names else str(rel)
            w.writerow(
                [name, stats.count, f"{stats.mrr:.10g}"]
                + [f"{stats.hits.get(k, float('nan')):.10g}" for k in ks]
            )


def write_sweep_csv(rows, path, relation_names=None) -> None:
    """Tidy CSV of beta-sweep rows: beta, relation, mrr, sd."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["beta", "relation", "mrr", "sd"])
        for beta, rel, mrr, sd in rows:
            name = relation_names(rel) if relation_names else str(rel)
            w.writerow([f"{beta:.10g}", name, f"{mrr:.10g}", f"{sd:.10g}"])
