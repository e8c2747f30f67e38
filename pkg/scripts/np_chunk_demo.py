#!/usr/bin/env python3
"""Train the multi-representation noun phrase chunker on synthetic data and
report combined versus per-representation scores plus bootstrap bounds."""

import argparse

from mbparse.evaluate import EvalConfig, bootstrap, score
from mbparse.pipeline import chunk_corpus_detail, train_chunker
from mbparse.synth import np_chunk_corpus


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--train-size", type=int, default=300)
    ap.add_argument("--test-size", type=int, default=200)
    ap.add_argument("--seed", type=int, default=4)
    ap.add_argument("--pos-noise", type=float, default=0.08)
    ap.add_argument("--samples", type=int, default=10_000)
    args = ap.parse_args()

    train_s, train_g = np_chunk_corpus(args.train_size, seed=args.seed,
                                       pos_noise=args.pos_noise)
    test_s, test_g = np_chunk_corpus(args.test_size, seed=args.seed + 1000,
                                     pos_noise=args.pos_noise)
    chunker = train_chunker(train_s, train_g)
    combined, per_rep = chunk_corpus_detail(chunker, test_s)

    for rep, spans in per_rep.items():
        r = score(spans, test_g)
        print(f"{rep.value:5s} P {r.precision:6.2f}  R {r.recall:6.2f}  F {r.f:6.2f}")
    r = score(combined, test_g)
    print(f"{'vote':5s} P {r.precision:6.2f}  R {r.recall:6.2f}  F {r.f:6.2f}")

    b = bootstrap(combined, test_g, EvalConfig(bootstrap_samples=args.samples,
                                               seed=args.seed))
    print(f"bootstrap mean {b.mean:.2f} sd {b.stddev:.2f} "
          f"bounds [{b.lower:.2f}, {b.upper:.2f}]")


if __name__ == "__main__":
    main()
