"""Triple ingestion and vocabulary management.

Datasets are three tab-separated files (train.txt, valid.txt, test.txt) of
``head<TAB>relation<TAB>tail`` lines.  Ids are assigned densely by first
appearance scanning train, then valid, then test; the filter index is the
de-duplicated union of all splits.  Fixed negative candidate lists (one line
per (head, relation) pair, negatives comma-separated) support the
fixed-negatives evaluation protocol.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "ParseError",
    "TripleStore",
    "NegativesTable",
    "load_triples",
    "build_store",
    "load_negatives",
    "load_dataset",
    "augmented_store",
]

logger = logging.getLogger(__name__)

SPLIT_FILES = {"train": "train.txt", "valid": "valid.txt", "test": "test.txt"}


class ParseError(ValueError):
    """A malformed dataset file, with the offending location in the message."""


@dataclass
class TripleStore:
    """Integer-encoded triples with bidirectional vocabularies and a filter index."""

    entity_to_id: dict[str, int]
    relation_to_id: dict[str, int]
    splits: dict[str, np.ndarray]
    filter_index: set[tuple[int, int, int]]
    entities_not_in_train: list[int] = field(default_factory=list)
    relations_not_in_train: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.id_to_entity = {i: name for name, i in self.entity_to_id.items()}
        self.id_to_relation = {i: name for name, i in self.relation_to_id.items()}

    @property
    def n_entities(self) -> int:
        return len(self.entity_to_id)

    @property
    def n_relations(self) -> int:
        return len(self.relation_to_id)

    def decode(self, triple) -> tuple[str, str, str]:
        h, k, t = (int(v) for v in triple)
        return self.id_to_entity[h], self.id_to_relation[k], self.id_to_entity[t]

    def entity_degrees(self) -> np.ndarray:
        """In-degree plus out-degree per entity, over the training split."""
        deg = np.zeros(self.n_entities, dtype=np.int64)
        train = self.splits["train"]
        np.add.at(deg, train[:, 0], 1)
        np.add.at(deg, train[:, 2], 1)
        return deg

    def summary(self) -> dict:
        return {
            "entities": self.n_entities,
            "relations": self.n_relations,
            "train": int(self.splits["train"].shape[0]),
            "valid": int(self.splits["valid"].shape[0]),
            "test": int(self.splits["test"].shape[0]),
            "entities_not_in_train": len(self.entities_not_in_train),
            "relations_not_in_train": len(self.relations_not_in_train),
        }


@dataclass
class NegativesTable:
    """Fixed negative candidates per (head, relation) pair; all lists equal length."""

    table: dict[tuple[int, int], np.ndarray]
    length: int


def load_triples(path) -> list[tuple[str, str, str]]:
    """Read head<TAB>relation<TAB>tail lines; empty lines are skipped."""
    path = Path(path)
    if not path.exists():
        raise ParseError(f"{path}: no such file")
    triples = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ParseError(f"{path}:{lineno}: expected 3 tab-separated columns, got {len(parts)}")
            triples.append((parts[0], parts[1], parts[2]))
    return triples


def build_store(train, valid, test) -> TripleStore:
    """Encode string triples into a TripleStore.

    Vocabulary ids follow first appearance over train, then valid, then test.
    Duplicate training triples are kept (they weight the loss) but the filter
    index holds each triple once.
    """
    entity_to_id: dict[str, int] = {}
    relation_to_id: dict[str, int] = {}
    splits: dict[str, np.ndarray] = {}
    not_in_train_e: list[int] = []
    not_in_train_r: list[int] = []

    for split_name, rows in (("train", train), ("valid", valid), ("test", test)):
        encoded = np.empty((len(rows), 3), dtype=np.int64)
        for i, (h, r, t) in enumerate(rows):
            for name, vocab, flagged in ((h, entity_to_id, not_in_train_e), (t, entity_to_id, not_in_train_e)):
                if name not in vocab:
                    vocab[name] = len(vocab)
                    if split_name != "train":
                        flagged.append(vocab[name])
            if r not in relation_to_id:
                relation_to_id[r] = len(relation_to_id)
                if split_name != "train":
                    not_in_train_r.append(relation_to_id[r])
            encoded[i] = (entity_to_id[h], relation_to_id[r], entity_to_id[t])
        splits[split_name] = encoded

    filter_index = {tuple(map(int, row)) for split in splits.values() for row in split}
    if not_in_train_e or not_in_train_r:
        logger.warning(
            "%d entities and %d relations first appear outside the training split",
            len(not_in_train_e),
            len(not_in_train_r),
        )
    return TripleStore(
        entity_to_id=entity_to_id,
        relation_to_id=relation_to_id,
        splits=splits,
        filter_index=filter_index,
        entities_not_in_train=not_in_train_e,
        relations_not_in_train=not_in_train_r,
    )


def load_dataset(directory) -> TripleStore:
    """Build a store from train.txt/valid.txt/test.txt inside ``directory``."""
    directory = Path(directory)
    loaded = {name: load_triples(directory / fname) for name, fname in SPLIT_FILES.items()}
    return build_store(loaded["train"], loaded["valid"], loaded["test"])


def load_negatives(path, store: TripleStore) -> NegativesTable:
    """Read fixed negatives: head<TAB>relation<TAB>neg1,neg2,... per line.

    All names must resolve against the store and all lists must have the same
    length.  A negative that happens to be a true tail elsewhere is kept, with
    a warning; the data passes through as given.
    """
    path = Path(path)
    if not path.exists():
        raise ParseError(f"{path}: no such file")
    table: dict[tuple[int, int], np.ndarray] = {}
    length: int | None = None
    true_hits = 0
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ParseError(f"{path}:{lineno}: expected 3 tab-separated columns, got {len(parts)}")
            head, rel, negs = parts
            try:
                h = store.entity_to_id[head]
                k = store.relation_to_id[rel]
                ids = [store.entity_to_id[n] for n in negs.split(",")]
            except KeyError as e:
                raise ParseError(f"{path}:{lineno}: unresolvable name {e.args[0]!r}") from None
            if length is None:
                length = len(ids)
            elif len(ids) != length:
                raise ParseError(
                    f"{path}:{lineno}: ragged negative list ({len(ids)} entries, expected {length})"
                )
            true_hits += sum((h, k, n) in store.filter_index for n in ids)
            table[(h, k)] = np.asarray(ids, dtype=np.int64)
    if true_hits:
        logger.warning("%d fixed negatives are themselves true triples; kept as given", true_hits)
    return NegativesTable(table=table, length=length or 0)


def augmented_store(store: TripleStore) -> TripleStore:
    """Store with reversed triples appended to every split under fresh inverse relations.

    Every relation k gains an inverse k + n_relations named ``inv:<name>``;
    each (h, k, t) in any split gains (t, inv k, h) in the same split.
    """
    from .training import augment_reverse

    n_r = store.n_relations
    relation_to_id = dict(store.relation_to_id)
    for name, k in store.relation_to_id.items():
        inv = f"inv:{name}"
        if inv in relation_to_id:
            raise ValueError(f"relation name collision for {inv!r}")
        relation_to_id[inv] = k + n_r
    splits = {name: augment_reverse(rows, n_r) for name, rows in store.splits.items()}
    filter_index = {tuple(map(int, row)) for split in splits.values() for row in split}
    return TripleStore(
        entity_to_id=dict(store.entity_to_id),
        relation_to_id=relation_to_id,
        splits=splits,
        filter_index=filter_index,
        entities_not_in_train=list(store.entities_not_in_train),
        relations_not_in_train=list(store.relations_not_in_train),
    )
