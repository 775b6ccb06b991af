#!/usr/bin/env python3
"""Generate the synthetic detection corpus on disk.

Writes train/test scenes with manifests, positive/negative training tiles,
and a background pool for hard-negative mining:

    python3 scripts/make_corpus.py --out corpus/ --seed 7
"""

import argparse

from facedet.synthetic import build_corpus, write_corpus


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--train", type=int, default=300, help="training scenes")
    parser.add_argument("--test", type=int, default=100, help="test scenes")
    args = parser.parse_args()
    corpus = build_corpus(seed=args.seed, n_train=args.train, n_test=args.test)
    paths = write_corpus(corpus, args.out)
    for name, path in sorted(paths.items()):
        print(f"{name}: {path}")
    print(
        f"scenes: {len(corpus.train)} train / {len(corpus.test)} test, "
        f"tiles: {len(corpus.pos_tiles)} pos / {len(corpus.neg_tiles)} neg, "
        f"pool: {len(corpus.pool)}"
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
