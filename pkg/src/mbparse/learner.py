"""Instance-based k-NN classification with entropy-normalized feature weights.

Learning stores the training instances verbatim.  A query is compared to
every stored instance with the weighted overlap metric (sum of per-feature
weights over mismatching positions) and labeled by majority vote over the
instances falling in the k nearest *distinct* distance values.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .errors import DomainError

# Reserved out-of-vocabulary symbol for positions outside a sentence.
PAD = "__"

# Weights all below this threshold count as a degenerate (all-zero) table.
DEGENERATE_WEIGHT_EPS = 1e-12

# Distances equal after rounding to this many decimals share a distance set.
_DISTANCE_DECIMALS = 9


class TiePolicy(Enum):
    GLOBAL_CLASS_FREQUENCY = "global_class_frequency"
    LEXICOGRAPHIC = "lexicographic"


@dataclass(frozen=True)
class Instance:
    """One categorical feature vector plus its class label."""

    features: tuple[str, ...]
    label: str

    def __post_init__(self):
        if len(self.features) < 1:
            raise DomainError("instance needs at least one feature")


@dataclass(frozen=True)
class LearnerConfig:
    k: int = 3
    tie_policy: TiePolicy = TiePolicy.GLOBAL_CLASS_FREQUENCY
    degenerate_weight_fallback: bool = True

    def __post_init__(self):
        if self.k < 1:
            raise DomainError(f"k must be >= 1, got {self.k}")


@dataclass(frozen=True)
class WeightTable:
    """Per-feature weights plus the entropy terms they were derived from.

    ``conditionals[i]`` maps each observed value of feature i to the pair
    (value probability, class entropy of the instances carrying the value).
    """

    weights: tuple[float, ...]
    class_entropy: float
    feature_value_entropies: tuple[float, ...]
    conditionals: tuple[Mapping[str, tuple[float, float]], ...] = ()


@dataclass(frozen=True)
class Classification:
    label: str
    nearest_distance: float
    votes: Mapping[str, int]


def entropy(counts: Mapping[str, float]) -> float:
    """Shannon entropy in bits of a count distribution."""
    total = 0.0
    for c in counts.values():
        if c < 0:
            raise DomainError(f"negative count {c!r}")
        total += c
    if total <= 0:
        raise DomainError("entropy of an empty distribution is undefined")
    h = 0.0
    for c in counts.values():
        if c > 0:
            p = c / total
            h -= p * math.log2(p)
    return h


def _check_dataset(dataset: Sequence[Instance]) -> int:
    if not dataset:
        raise DomainError("empty dataset")
    arity = len(dataset[0].features)
    for inst in dataset:
        if len(inst.features) != arity:
            raise DomainError(
                f"mixed arity: expected {arity}, got {len(inst.features)}"
            )
    return arity


def gain_ratio_weights(dataset: Sequence[Instance]) -> WeightTable:
    """Information gain of each feature about the class, normalized by the
    feature's own value entropy.  Constant features get weight 0.
    """
    arity = _check_dataset(dataset)
    n = len(dataset)
    class_counts = Counter(inst.label for inst in dataset)
    h_class = entropy(class_counts)

    weights = []
    value_entropies = []
    conditionals = []
    for i in range(arity):
        value_counts: Counter[str] = Counter()
        class_by_value: dict[str, Counter[str]] = {}
        for inst in dataset:
            v = inst.features[i]
            value_counts[v] += 1
            class_by_value.setdefault(v, Counter())[inst.label] += 1
        h_value = entropy(value_counts)
        cond: dict[str, tuple[float, float]] = {}
        expected = 0.0
        for v, nv in value_counts.items():
            p_v = nv / n
            h_cv = entropy(class_by_value[v])
            cond[v] = (p_v, h_cv)
            expected += p_v * h_cv
        if h_value == 0.0:
            w = 0.0  # constant feature carries no information
        else:
            w = max(0.0, (h_class - expected) / h_value)
        weights.append(w)
        value_entropies.append(h_value)
        conditionals.append(cond)

    return WeightTable(
        weights=tuple(weights),
        class_entropy=h_class,
        feature_value_entropies=tuple(value_entropies),
        conditionals=tuple(conditionals),
    )


@dataclass(frozen=True)
class Model:
    """An immutable trained classifier; safe to share across workers."""

    instances: tuple[Instance, ...]
    weight_table: WeightTable
    config: LearnerConfig
    class_frequencies: Mapping[str, int]

    @property
    def arity(self) -> int:
        return len(self.weight_table.weights)

    @cached_property
    def _index(self) -> "_ModelIndex":
        return _ModelIndex.build(self)


class _ModelIndex:
    """Integer-coded view of a model for vectorized distance computation."""

    def __init__(self, codes, matrix, weights, label_ids, labels_in_pref, onehot):
        self.codes = codes              # per feature: symbol -> int
        self.matrix = matrix            # n x arity int32
        self.weights = weights          # float64 per feature
        self.label_ids = label_ids      # n int32, ids into labels_in_pref
        self.labels_in_pref = labels_in_pref  # labels, tie-preference order
        self.onehot = onehot            # n x n_labels int32

    @staticmethod
    def build(model: "Model") -> "_ModelIndex":
        arity = model.arity
        codes: list[dict[str, int]] = [{} for _ in range(arity)]
        n = len(model.instances)
        matrix = np.empty((n, arity), dtype=np.int32)
        for r, inst in enumerate(model.instances):
            for i, v in enumerate(inst.features):
                table = codes[i]
                code = table.get(v)
                if code is None:
                    code = table[v] = len(table)
                matrix[r, i] = code

        if model.config.tie_policy is TiePolicy.GLOBAL_CLASS_FREQUENCY:
            pref = sorted(
                model.class_frequencies,
                key=lambda c: (-model.class_frequencies[c], c),
            )
        else:
            pref = sorted(model.class_frequencies)
        label_pos = {c: i for i, c in enumerate(pref)}
        label_ids = np.array(
            [label_pos[inst.label] for inst in model.instances], dtype=np.int32
        )
        onehot = np.zeros((n, len(pref)), dtype=np.int32)
        onehot[np.arange(n), label_ids] = 1
        weights = np.asarray(model.weight_table.weights, dtype=np.float64)
        return _ModelIndex(codes, matrix, weights, label_ids, pref, onehot)

    def encode_queries(self, queries: Sequence[Sequence[str]]) -> np.ndarray:
        q = np.full((len(queries), self.matrix.shape[1]), -1, dtype=np.int32)
        for r, query in enumerate(queries):
            for i, v in enumerate(query):
                q[r, i] = self.codes[i].get(v, -1)  # unseen value matches nothing
        return q


def train(dataset: Sequence[Instance], config: LearnerConfig | None = None) -> Model:
    """Store the dataset and compute its feature weights.

    With ``degenerate_weight_fallback`` on, an all-zero weight table (every
    weight below 1e-12) is replaced by uniform weights so that the overlap
    metric still discriminates.
    """
    if config is None:
        config = LearnerConfig()
    _check_dataset(dataset)
    table = gain_ratio_weights(dataset)
    if config.degenerate_weight_fallback and all(
        w < DEGENERATE_WEIGHT_EPS for w in table.weights
    ):
        table = WeightTable(
            weights=tuple(1.0 for _ in table.weights),
            class_entropy=table.class_entropy,
            feature_value_entropies=table.feature_value_entropies,
            conditionals=table.conditionals,
        )
    freqs = Counter(inst.label for inst in dataset)
    return Model(
        instances=tuple(dataset),
        weight_table=table,
        config=config,
        class_frequencies=dict(freqs),
    )


def _check_query(model: Model, query: Sequence[str], index: int | None = None):
    if len(query) != model.arity:
        where = "" if index is None else f" at index {index}"
        raise DomainError(
            f"query arity {len(query)}{where} does not match model arity {model.arity}"
        )


def _batch_winner_ids(model: Model, encoded: np.ndarray, block: int = 512):
    """Vectorized nearest-distance-set majority vote.

    Yields (winner ids, nearest distances, vote count matrix) per block of
    queries.  Queries are read-only with respect to the model, so callers may
    evaluate them concurrently.
    """
    idx = model._index
    k = model.config.k
    n = idx.matrix.shape[0]
    arity = idx.matrix.shape[1]
    for lo in range(0, encoded.shape[0], block):
        q = encoded[lo : lo + block]
        b = q.shape[0]
        dist = np.zeros((b, n), dtype=np.float64)
        for i in range(arity):
            w = idx.weights[i]
            if w != 0.0:
                dist += w * (q[:, i : i + 1] != idx.matrix[None, :, i])
        rounded = np.round(dist, _DISTANCE_DECIMALS)
        order = np.sort(rounded, axis=1)
        if n > 1:
            ranks = np.zeros((b, n), dtype=np.int64)
            np.cumsum(order[:, 1:] != order[:, :-1], axis=1, out=ranks[:, 1:])
        else:
            ranks = np.zeros((b, 1), dtype=np.int64)
        n_distinct = ranks[:, -1] + 1
        kk = np.minimum(k, n_distinct)
        cutoff = (ranks < kk[:, None]).sum(axis=1)
        threshold = order[np.arange(b), cutoff - 1]
        mask = rounded <= threshold[:, None]
        votes = mask.astype(np.int32) @ idx.onehot
        winners = np.argmax(votes, axis=1)  # columns are in tie-preference order
        yield winners, dist.min(axis=1), votes


def classify_batch(
    model: Model, queries: Sequence[Sequence[str]]
) -> list[Classification]:
    """Classify queries in order; elementwise identical to ``classify``."""
    for i, q in enumerate(queries):
        _check_query(model, q, i)
    if not queries:
        return []
    idx = model._index
    encoded = idx.encode_queries(queries)
    out: list[Classification] = []
    for winners, nearest, votes in _batch_winner_ids(model, encoded):
        for r in range(len(winners)):
            counts = {
                idx.labels_in_pref[c]: int(votes[r, c])
                for c in range(votes.shape[1])
                if votes[r, c] > 0
            }
            out.append(
                Classification(
                    label=idx.labels_in_pref[winners[r]],
                    nearest_distance=float(nearest[r]),
                    votes=counts,
                )
            )
    return out


def classify(model: Model, query: Sequence[str]) -> Classification:
    """Label a single query by majority over the k nearest distance sets."""
    _check_query(model, query)
    return classify_batch(model, [query])[0]


def classify_labels(model: Model, queries: Sequence[Sequence[str]]) -> list[str]:
    """Labels only; cheaper than ``classify_batch`` for bulk tagging."""
    for i, q in enumerate(queries):
        _check_query(model, q, i)
    if not queries:
        return []
    idx = model._index
    encoded = idx.encode_queries(queries)
    labels: list[str] = []
    for winners, _, _ in _batch_winner_ids(model, encoded):
        labels.extend(idx.labels_in_pref[w] for w in winners)
    return labels


# ---------------------------------------------------------------------------
# Persistence: versioned line-oriented text format.

_FORMAT = "knn-model 1"


def _escape(symbol: str) -> str:
    return symbol.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")


def _unescape(text: str) -> str:
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            nxt = text[i + 1]
            out.append({"\\": "\\", "t": "\t", "n": "\n"}.get(nxt, nxt))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def save_model(model: Model, path) -> None:
    lines = [
        _FORMAT,
        f"arity {model.arity}",
        f"k {model.config.k}",
        f"tie-policy {model.config.tie_policy.value}",
        f"fallback {int(model.config.degenerate_weight_fallback)}",
        "weights " + " ".join(repr(w) for w in model.weight_table.weights),
        "classes "
        + "\t".join(
            f"{_escape(c)}\t{n}" for c, n in sorted(model.class_frequencies.items())
        ),
    ]
    for inst in model.instances:
        lines.append("\t".join(_escape(v) for v in (*inst.features, inst.label)))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path) -> Model:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != _FORMAT:
        raise DomainError(f"{path}: not a {_FORMAT!r} file")

    # fixed header: one line per field, in save order, then instance lines
    fields = ("arity", "k", "tie-policy", "fallback", "weights", "classes")
    if len(lines) < 1 + len(fields):
        raise DomainError(f"{path}: truncated header")
    header: dict[str, str] = {}
    for key, line in zip(fields, lines[1:]):
        got, _, rest = line.partition(" ")
        if got != key:
            raise DomainError(f"{path}: expected header field {key!r}, got {got!r}")
        header[key] = rest
    body = 1 + len(fields)

    arity = int(header["arity"])
    config = LearnerConfig(
        k=int(header["k"]),
        tie_policy=TiePolicy(header["tie-policy"]),
        degenerate_weight_fallback=bool(int(header["fallback"])),
    )
    weights = tuple(float(w) for w in header["weights"].split())
    if len(weights) != arity:
        raise DomainError(f"{path}: weight line does not match arity")

    class_fields = header["classes"].split("\t")
    if len(class_fields) % 2 != 0:
        raise DomainError(f"{path}: malformed class-frequency line")
    freqs = {
        _unescape(class_fields[i]): int(class_fields[i + 1])
        for i in range(0, len(class_fields), 2)
    }

    instances = []
    for line in lines[body:]:
        if not line:
            continue
        fields = [_unescape(f) for f in line.split("\t")]
        if len(fields) != arity + 1:
            raise DomainError(f"{path}: instance line has {len(fields)} fields")
        instances.append(Instance(tuple(fields[:arity]), fields[arity]))
    if not instances:
        raise DomainError(f"{path}: model stores no instances")
    if sum(freqs.values()) != len(instances):
        raise DomainError(f"{path}: class frequencies do not sum to instance count")

    table = gain_ratio_weights(instances)
    table = WeightTable(
        weights=weights,  # stored weights are authoritative (fallback applied)
        class_entropy=table.class_entropy,
        feature_value_entropies=table.feature_value_entropies,
        conditionals=table.conditionals,
    )
    return Model(
        instances=tuple(instances),
        weight_table=table,
        config=config,
        class_frequencies=freqs,
    )
