#!/usr/bin/env python3
"""Write the bundled synthetic corpora to disk in column format.

Produces train/test pairs for each task so the command line can be exercised
without licensed treebank data:

    np.train / np.test            word pos chunk     (noun phrase chunks)
    typed.train / typed.test      word pos chunk     (typed chunks)
    clauses.train / clauses.test  word pos chunk clause
    trees.train / trees.test      word pos tree      (full bracketings)
"""

import argparse
import os

from mbparse.corpus import encode_bracket_column, encode_clause_column, write_corpus
from mbparse.schemes import Scheme, encode
from mbparse.synth import clause_corpus, np_chunk_corpus, parse_corpus, typed_chunk_corpus


def chunk_rows(sentences, gold, typed):
    for s, g in zip(sentences, gold):
        tags = encode(g, Scheme.IOB1, len(s), typed=typed)
        yield [(t.word, t.pos, tag) for t, tag in zip(s, tags)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="toy-corpora")
    ap.add_argument("--train-size", type=int, default=300)
    ap.add_argument("--test-size", type=int, default=200)
    ap.add_argument("--seed", type=int, default=4)
    ap.add_argument("--pos-noise", type=float, default=0.08)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    def path(name):
        return os.path.join(args.out, name)

    for part, size, seed in (
        ("train", args.train_size, args.seed),
        ("test", args.test_size, args.seed + 1000),
    ):
        s, g = np_chunk_corpus(size, seed=seed, pos_noise=args.pos_noise)
        write_corpus(chunk_rows(s, g, False), path(f"np.{part}"),
                     columns=("word", "pos", "chunk"))

        s, g = typed_chunk_corpus(size, seed=seed, pos_noise=args.pos_noise)
        write_corpus(chunk_rows(s, g, True), path(f"typed.{part}"),
                     columns=("word", "pos", "chunk"))

        s, chunks, forests = clause_corpus(size, seed=seed)
        rows = []
        for sent, forest in zip(s, forests):
            cells = encode_clause_column(forest, len(sent))
            rows.append([(t.word, t.pos, t.chunk_tag, c) for t, c in zip(sent, cells)])
        write_corpus(rows, path(f"clauses.{part}"),
                     columns=("word", "pos", "chunk", "clause"))

        s, g = parse_corpus(size, seed=seed)
        rows = []
        for sent, spans in zip(s, g):
            cells = encode_bracket_column(spans, len(sent))
            rows.append([(t.word, t.pos, c) for t, c in zip(sent, cells)])
        write_corpus(rows, path(f"trees.{part}"), columns=("word", "pos", "tree"))

    print(f"wrote toy corpora to {args.out}/")


if __name__ == "__main__":
    main()
