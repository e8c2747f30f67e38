"""Leak-free training-data construction for cascaded cross-validation.

A two-phase learner tags its own training corpus in phase one and consumes
those tags as context features in phase two.  Done naively in n-fold
cross-validation, gold tags of a test section reach its training material
through the phase-one predictions.  Two preventions are supported:

* NESTED_CV: the phase-two training tags for section x come from an inner
  (n-1)-fold cross-validation over the sections other than x.
* GOLD_IN_TRAIN: phase-two training rows carry corpus (gold) context tags;
  only test rows carry predicted tags.

Every produced tag carries the set of sections whose gold annotations
influenced it, so leak-freedom is a checkable assertion, not a convention.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .errors import DomainError
from .features import FeatureTemplate, Token, extract
from .learner import Instance, LearnerConfig, classify_labels, train
from .schemes import ChunkSpan, Scheme, encode


class LeakMode(Enum):
    NESTED_CV = "nested_cv"
    GOLD_IN_TRAIN = "gold_in_train"


@dataclass(frozen=True)
class Fold:
    test_section: int
    phase1_train: tuple[int, ...]
    # NESTED_CV only: per training section, the sections used to produce its
    # phase-two context tags.
    inner: Mapping[int, tuple[int, ...]] | None


@dataclass(frozen=True)
class FoldPlan:
    n: int
    leak_mode: LeakMode
    folds: tuple[Fold, ...]


def build_fold_plan(n: int, leak_mode: LeakMode) -> FoldPlan:
    if n < 3:
        raise DomainError(f"need at least 3 sections, got {n}")
    folds = []
    sections = tuple(range(n))
    for x in sections:
        others = tuple(s for s in sections if s != x)
        inner = None
        if leak_mode is LeakMode.NESTED_CV:
            inner = {y: tuple(s for s in others if s != y) for y in others}
        folds.append(Fold(test_section=x, phase1_train=others, inner=inner))
    return FoldPlan(n=n, leak_mode=leak_mode, folds=tuple(folds))


def training_gold_closure(plan: FoldPlan, fold: Fold) -> frozenset[int]:
    """Sections whose gold annotations reach this fold's training material,
    through any number of phases."""
    closure = set(fold.phase1_train)  # phase-1 labels, phase-2 labels
    if fold.inner is not None:
        for y, inner_train in fold.inner.items():
            closure.add(y)
            closure.update(inner_train)  # context tags for y's phase-2 rows
    return frozenset(closure)


def assert_leak_free(plan: FoldPlan) -> None:
    for fold in plan.folds:
        closure = training_gold_closure(plan, fold)
        if fold.test_section in closure:
            raise AssertionError(
                f"section {fold.test_section} leaks into its own training data"
            )


# ---------------------------------------------------------------------------
# Executable check: run a real two-phase learner over sections, tracking the
# provenance of every derived tag.


@dataclass(frozen=True)
class SectionResult:
    tags: tuple[tuple[str, ...], ...]
    provenance: frozenset[int]  # sections whose gold shaped these predictions


def _pass1_instances(sentences, gold, scheme: Scheme, template):
    out = []
    for s, spans in zip(sentences, gold):
        tags = encode(spans, scheme, len(s), typed=False)
        out.extend(Instance(extract(s, i, template), tags[i]) for i in range(len(s)))
    return out


def _pass2_instances(sentences, gold, context_tags, scheme: Scheme, template):
    out = []
    for s, spans, ctx in zip(sentences, gold, context_tags):
        gold_tags = encode(spans, scheme, len(s), typed=False)
        ctx_sent = [replace(t, chunk_tag=c) for t, c in zip(s, ctx)]
        out.extend(
            Instance(extract(ctx_sent, i, template), gold_tags[i])
            for i in range(len(s))
        )
    return out


def _tag(model, sentences, template, context=None):
    feats, bounds = [], []
    for si, s in enumerate(sentences):
        lo = len(feats)
        view = s
        if context is not None:
            view = [replace(t, chunk_tag=c) for t, c in zip(s, context[si])]
        feats.extend(extract(view, i, template) for i in range(len(view)))
        bounds.append((lo, len(feats)))
    labels = classify_labels(model, feats)
    return [tuple(labels[a:b]) for a, b in bounds]


def run_two_phase_cv(
    sections: Sequence[Sequence[list[Token]]],
    gold: Sequence[Sequence[list[ChunkSpan]]],
    scheme: Scheme,
    pass1_template: FeatureTemplate,
    pass2_template: FeatureTemplate,
    learner_config: LearnerConfig,
    plan: FoldPlan,
) -> dict[int, SectionResult]:
    """Tag every section with a two-phase learner trained per the fold plan.

    Raises AssertionError if any produced tag's provenance includes its own
    section; returns per-section predictions with provenance.
    """
    if plan.n != len(sections) or plan.n != len(gold):
        raise DomainError("plan size does not match section count")

    def concat(idx: Iterable[int]):
        sents, spans = [], []
        for s in idx:
            sents.extend(sections[s])
            spans.extend(gold[s])
        return sents, spans

    results: dict[int, SectionResult] = {}
    for fold in plan.folds:
        x = fold.test_section
        p1_sents, p1_gold = concat(fold.phase1_train)
        model1 = train(
            _pass1_instances(p1_sents, p1_gold, scheme, pass1_template),
            learner_config,
        )
        model1_prov = frozenset(fold.phase1_train)

        # phase-2 training rows with context tags
        inst2 = []
        train_prov: set[int] = set(fold.phase1_train)
        if plan.leak_mode is LeakMode.GOLD_IN_TRAIN:
            for y in fold.phase1_train:
                ctx = [
                    encode(spans, scheme, len(s), typed=False)
                    for s, spans in zip(sections[y], gold[y])
                ]
                inst2.extend(
                    _pass2_instances(sections[y], gold[y], ctx, scheme, pass2_template)
                )
        else:
            for y in fold.phase1_train:
                inner_sents, inner_gold = concat(fold.inner[y])
                inner_model = train(
                    _pass1_instances(inner_sents, inner_gold, scheme, pass1_template),
                    learner_config,
                )
                ctx = _tag(inner_model, sections[y], pass1_template)
                train_prov.update(fold.inner[y])
                inst2.extend(
                    _pass2_instances(sections[y], gold[y], ctx, scheme, pass2_template)
                )
        model2 = train(inst2, learner_config)

        test_ctx = _tag(model1, sections[x], pass1_template)
        tags = _tag(model2, sections[x], pass2_template, context=test_ctx)
        provenance = frozenset(train_prov) | model1_prov
        if x in provenance:
            raise AssertionError(f"gold tags of section {x} leaked into its training")
        results[x] = SectionResult(tags=tuple(tags), provenance=provenance)
    return results
