"""Exclusive-or benchmark for the learner's tolerance of irrelevant features.

Each run builds 100 copies of the four exclusive-or patterns for training and
for testing, appends a configurable number of independent uniform random bits
to every row, trains a learner (degenerate-weight fallback on), and counts how
many of the 400 test rows come back with the right label.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError
from .learner import Instance, LearnerConfig, classify_labels, train

_PATTERNS = (("0", "0", "0"), ("0", "1", "1"), ("1", "0", "1"), ("1", "1", "0"))
_COPIES = 100


def _build_rows(rng: np.random.Generator, num_random_features: int):
    instances = []
    if num_random_features:
        bits = rng.integers(0, 2, size=(4 * _COPIES, num_random_features))
    for p, (a, b, label) in enumerate(_PATTERNS):
        for c in range(_COPIES):
            feats = [a, b]
            if num_random_features:
                row = bits[p * _COPIES + c]
                feats.extend("1" if v else "0" for v in row)
            instances.append(Instance(tuple(feats), label))
    return instances


def xor_run(
    rng: np.random.Generator, num_random_features: int, k: int = 3
) -> int:
    """One train/test round; returns the number of correct test rows (of 400)."""
    train_set = _build_rows(rng, num_random_features)
    test_set = _build_rows(rng, num_random_features)
    model = train(train_set, LearnerConfig(k=k, degenerate_weight_fallback=True))
    predicted = classify_labels(model, [inst.features for inst in test_set])
    return sum(p == inst.label for p, inst in zip(predicted, test_set))


def xor_experiment(
    num_random_features: int, runs: int, seed: int, k: int = 3
) -> float:
    """Mean number of correct test patterns (out of 400) over ``runs`` rounds."""
    if num_random_features < 0:
        raise DomainError("num_random_features must be >= 0")
    if runs < 1:
        raise DomainError("runs must be >= 1")
    rng = np.random.default_rng(seed)
    total = 0
    for _ in range(runs):
        total += xor_run(rng, num_random_features, k=k)
    return total / runs
