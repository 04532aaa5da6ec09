"""Command-line entry point.

Subcommands: train, evaluate, rank, sweep-beta, stats.  Runs are driven by a
flat key = value configuration assembled from defaults, an optional preset,
an optional config file and explicit flags, in that order (flags win).  The
resolved configuration is frozen next to every training run so it can be
replayed verbatim.
"""

from __future__ import annotations

import argparse
import dataclasses
import difflib
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import evaluation, training
from .data import load_dataset, load_negatives, augmented_store
from .evaluation import EvalMode, EvalProtocol
from .geometry import GeometryConfig, Signature
from .likelihood import TfdParams, sigmoid
from .model import InitConfig, load_checkpoint, save_checkpoint, scale_node_bias, score_tails
from .presets import PRESETS
from .relmaps import Variant
from .training import OptimizerKind, TrainConfig

__all__ = ["RunConfig", "resolve_config", "main"]

logger = logging.getLogger(__name__)


@dataclass
class RunConfig:
    """One flat document of every run setting; unknown keys are rejected."""

    variant: str = "dt"
    n_t: int = 1
    n_x: int = 32
    circumference: float | None = None
    swap_transforms: bool = False
    tau1: float = 0.5
    tau2: float = 0.5
    u: float = 0.1
    alpha: float = 0.5
    alpha_prime: float = 1.0
    beta: float = 0.0
    k_scale: float = 1.0
    sigma_init: float = 0.02
    seed: int = 0
    optimizer: str = "adam"
    learning_rate: float = 0.001
    batch_size: int = 128
    m_negatives: int = 10
    max_epochs: int = 100
    eval_every: int = 5
    patience: int = 10
    augment_reverse: bool = False
    protocol: str = "full"
    negatives: str | None = None
    data: str = "."
    out: str = "run"
    threads: int = 1


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}
_OPTIONAL = {"circumference": float, "negatives": str}
_BOOL_FIELDS = {"swap_transforms", "augment_reverse"}
_INT_FIELDS = {"n_t", "n_x", "seed", "batch_size", "m_negatives", "max_epochs", "eval_every", "patience", "threads"}
_FLOAT_FIELDS = {"tau1", "tau2", "u", "alpha", "alpha_prime", "beta", "k_scale", "sigma_init", "learning_rate"}


def _parse_value(key: str, raw):
    if key not in _FIELDS:
        raise ValueError(f"unknown configuration key {key!r}")
    if not isinstance(raw, str):
        return raw
    raw = raw.strip()
    if key in _OPTIONAL:
        return None if raw.lower() == "none" else _OPTIONAL[key](raw)
    if key in _BOOL_FIELDS:
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ValueError(f"{key}: expected a boolean, got {raw!r}")
    if key in _INT_FIELDS:
        return int(raw)
    if key in _FLOAT_FIELDS:
        return float(raw)
    return raw


def _read_config_file(path) -> dict:
    values = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, raw = line.partition("=")
            values[key.strip()] = _parse_value(key.strip(), raw)
    return values


def resolve_config(preset: str | None = None, config_file=None, overrides: dict | None = None) -> RunConfig:
    """Defaults, then preset, then config file, then explicit overrides."""
    values = dataclasses.asdict(RunConfig())
    if preset is not None:
        if preset not in PRESETS:
            raise ValueError(f"unknown preset {preset!r}; available: {', '.join(sorted(PRESETS))}")
        values.update(PRESETS[preset])
    if config_file is not None:
        values.update(_read_config_file(config_file))
    for key, raw in (overrides or {}).items():
        values[key] = _parse_value(key, raw)
    return RunConfig(**values)


def write_resolved(config: RunConfig, path) -> None:
    lines = []
    for f in dataclasses.fields(RunConfig):
        value = getattr(config, f.name)
        lines.append(f"{f.name} = {'none' if value is None else value}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _geometry(config: RunConfig) -> GeometryConfig:
    return GeometryConfig(Signature(config.n_t, config.n_x), config.circumference)


def _tfd(config: RunConfig) -> TfdParams:
    return TfdParams(
        tau1=config.tau1,
        tau2=config.tau2,
        u=config.u,
        alpha=config.alpha,
        alpha_prime=config.alpha_prime,
        beta=config.beta,
        k_scale=config.k_scale,
    )


def _train_config(config: RunConfig) -> TrainConfig:
    return TrainConfig(
        m_negatives=config.m_negatives,
        batch_size=config.batch_size,
        learning_rate=config.learning_rate,
        optimizer=OptimizerKind(config.optimizer),
        max_epochs=config.max_epochs,
        eval_every=config.eval_every,
        patience=config.patience,
        augment_reverse=config.augment_reverse,
        seed=config.seed,
    )


def _protocol(config: RunConfig, store) -> EvalProtocol:
    if config.protocol == "full":
        return EvalProtocol()
    if config.protocol != "fixed":
        raise ValueError(f"unknown protocol {config.protocol!r} (expected 'full' or 'fixed')")
    if config.augment_reverse:
        raise ValueError("fixed-negatives protocol does not combine with augment_reverse")
    if config.negatives is None:
        raise ValueError("fixed-negatives protocol requires a negatives file")
    table = load_negatives(config.negatives, store)
    return EvalProtocol(mode=EvalMode.FIXED_NEGATIVES, negatives=table)


def _store_for_params(params, data_dir):
    """Load the dataset, augmenting it when the checkpoint was trained augmented."""
    store = load_dataset(data_dir)
    if params.n_relations == store.n_relations:
        return store
    if params.n_relations == 2 * store.n_relations:
        return augmented_store(store)
    raise ValueError(
        f"checkpoint has {params.n_relations} relations but the dataset has {store.n_relations}"
    )


def cmd_train(args) -> int:
    config = resolve_config(args.preset, args.config, _collect_overrides(args))
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    store = load_dataset(config.data)
    eval_store = augmented_store(store) if config.augment_reverse else store
    protocol = _protocol(config, eval_store)
    params, log = training.train(
        store,
        _train_config(config),
        _geometry(config),
        _tfd(config),
        Variant(config.variant),
        init_cfg=InitConfig(sigma_init=config.sigma_init, seed=config.seed),
        protocol=protocol,
        swap_transforms=config.swap_transforms,
    )
    save_checkpoint(params, out / "model.ckpt")
    training.write_log_csv(log, out / "log.csv")
    write_resolved(config, out / "config.resolved")
    best = max((row.val_mrr for row in log if row.val_mrr is not None), default=float("nan"))
    print(f"trained {config.max_epochs}-epoch budget, best val MRR {best:.4f}; outputs in {out}")
    return 0


def cmd_evaluate(args) -> int:
    params = load_checkpoint(args.checkpoint)
    store = _store_for_params(params, args.data)
    if args.gamma_b != 1.0:
        params = scale_node_bias(params, args.gamma_b)
    protocol = EvalProtocol()
    if args.protocol == "fixed":
        if args.negatives is None:
            raise ValueError("--protocol fixed requires --negatives")
        protocol = EvalProtocol(
            mode=EvalMode.FIXED_NEGATIVES, negatives=load_negatives(args.negatives, store)
        )
    split = store.splits[args.split]
    report = evaluation.evaluate_split(params, split, store.filter_index, protocol, threads=args.threads)
    text = evaluation.format_report(report, store.id_to_relation.get, per_relation=args.per_relation)
    print(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.txt").write_text(text + "\n", encoding="utf-8")
        evaluation.write_report_csv(report, out / "report.csv", store.id_to_relation.get)
    return 0


def _resolve_name(name: str, vocab: dict, what: str) -> int:
    if name in vocab:
        return vocab[name]
    near = difflib.get_close_matches(name, vocab.keys(), n=5, cutoff=0.4)
    hint = f"; closest: {', '.join(near)}" if near else ""
    raise ValueError(f"unknown {what} {name!r}{hint}")


def cmd_rank(args) -> int:
    params = load_checkpoint(args.checkpoint)
    store = _store_for_params(params, args.data)
    if args.gamma_b != 1.0:
        params = scale_node_bias(params, args.gamma_b)
    head = _resolve_name(args.head, store.entity_to_id, "entity")
    rel = _resolve_name(args.relation, store.relation_to_id, "relation")
    scores = score_tails(params, head, rel, np.arange(params.n_entities))
    degrees = store.entity_degrees()
    top = np.argsort(-scores, kind="stable")[: min(args.top, params.n_entities)]
    print(f"{'tail':<32s} {'score':>10s} {'probability':>12s} {'degree':>7s} known")
    for t in top:
        known = (head, rel, int(t)) in store.filter_index
        print(
            f"{store.id_to_entity[int(t)]:<32s} {scores[t]:>10.4f} {float(sigmoid(scores[t])):>12.6f} "
            f"{degrees[t]:>7d} {'yes' if known else 'no'}"
        )
    return 0


def cmd_sweep_beta(args) -> int:
    config = resolve_config(args.preset, args.config, _collect_overrides(args))
    betas = [float(b) for b in args.betas.split(",")]
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    store = load_dataset(config.data)
    if args.checkpoint:
        params = load_checkpoint(args.checkpoint)
        eval_store = _store_for_params(params, config.data)
        protocol = _protocol(config, eval_store)
        split = eval_store.splits["valid"]
        retrain = None
    else:
        eval_store = augmented_store(store) if config.augment_reverse else store
        protocol = _protocol(config, eval_store)
        split = eval_store.splits["valid"]
        params = None

        def retrain(beta, rep):
            cfg = dataclasses.replace(_train_config(config), seed=config.seed + rep)
            tfd = dataclasses.replace(_tfd(config), beta=float(beta))
            trained, _ = training.train(
                store,
                cfg,
                _geometry(config),
                tfd,
                Variant(config.variant),
                init_cfg=InitConfig(sigma_init=config.sigma_init, seed=config.seed + rep),
                protocol=protocol,
                swap_transforms=config.swap_transforms,
            )
            return trained

    rows = evaluation.beta_sweep(
        params,
        split,
        eval_store.filter_index,
        betas,
        protocol=protocol,
        retrain=retrain,
        repeats=args.repeats,
        threads=config.threads,
    )
    evaluation.write_sweep_csv(rows, out / "sweep.csv", eval_store.id_to_relation.get)
    print(f"wrote {out / 'sweep.csv'} ({len(rows)} rows)")
    return 0


def cmd_stats(args) -> int:
    store = load_dataset(args.data)
    for key, value in store.summary().items():
        print(f"{key:<24s} {value}")
    return 0


def _collect_overrides(args) -> dict:
    overrides = dict(args.set or [])
    for key in ("data", "out", "seed", "threads"):
        if getattr(args, key, None) is not None:
            overrides[key] = getattr(args, key)
    return overrides


def _add_run_arguments(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", choices=sorted(PRESETS), help="named hyperparameter preset")
    p.add_argument("--config", help="flat key = value configuration file")
    p.add_argument(
        "--set",
        nargs=2,
        action="append",
        metavar=("KEY", "VALUE"),
        help="override any configuration key (repeatable)",
    )
    p.add_argument("--data", help="dataset directory (train.txt/valid.txt/test.txt)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int, help="run seed")
    p.add_argument("--threads", type=int, help="evaluation thread cap (1 = deterministic)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pseudoe", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model and write checkpoint, log and resolved config")
    _add_run_arguments(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="rank a split and report MRR/hits@k")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split", choices=("valid", "test"), default="test")
    p.add_argument("--protocol", choices=("full", "fixed"), default="full")
    p.add_argument("--negatives", help="fixed negatives file (protocol 'fixed')")
    p.add_argument("--gamma-b", type=float, default=1.0, help="scale node biases before scoring")
    p.add_argument("--per-relation", action="store_true", help="include the per-relation breakdown")
    p.add_argument("--out", help="also write report.txt and report.csv here")
    p.add_argument("--threads", type=int, default=int(os.environ.get("PSEUDOE_THREADS", "1")))
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("rank", help="top-K tail predictions for a head and relation")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--head", required=True)
    p.add_argument("--relation", required=True)
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--gamma-b", type=float, default=1.0)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("sweep-beta", help="per-relation MRR as the mixing weight varies")
    _add_run_arguments(p)
    p.add_argument("--betas", required=True, help="comma-separated values in [0, 1]")
    p.add_argument("--checkpoint", help="rescore this model instead of retraining per point")
    p.add_argument("--repeats", type=int, default=1, help="independent seeds per beta point")
    p.set_defaults(func=cmd_sweep_beta)

    p = sub.add_parser("stats", help="dataset counts")
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", None) is None and os.environ.get("PSEUDOE_THREADS"):
        args.threads = int(os.environ["PSEUDOE_THREADS"])
    try:
        return args.func(args)
    except Exception as exc:  # one-line diagnostic, nonzero exit
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
