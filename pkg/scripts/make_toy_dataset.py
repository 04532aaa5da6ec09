#!/usr/bin/env python3
"""Write a small synthetic dataset in the standard three-file layout.

Handy for trying the CLI end to end:

    python scripts/make_toy_dataset.py --out toy_data
    pseudoe train --data toy_data --out toy_run --set max_epochs 50 --set n_x 15
    pseudoe evaluate --checkpoint toy_run/model.ckpt --data toy_data --per-relation
"""

import argparse
from pathlib import Path

from pseudoe.synthetic import tree_clique_graph


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="toy_data")
    parser.add_argument("--nodes", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    _, train, valid = tree_clique_graph(n_nodes=args.nodes, clique_size=5, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, rows in (("train.txt", train), ("valid.txt", valid), ("test.txt", valid)):
        (out / name).write_text("".join(f"{h}\t{r}\t{t}\n" for h, r, t in rows), encoding="utf-8")
    print(f"wrote {len(train)} train / {len(valid)} valid / {len(valid)} test triples to {out}/")


if __name__ == "__main__":
    main()
