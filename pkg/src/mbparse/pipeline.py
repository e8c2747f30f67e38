"""Chunking, clause and parsing cascades built on the k-NN learner.

The two-pass multi-representation chunker follows a fixed recipe: tag each
configured representation twice (the second pass sees the first pass's tags
as context), convert every output to open- and close-bracket streams, vote
the open streams and the close streams separately, and repair the winners
into a span set.  Parsers repeat chunking on head-compressed sentences,
one bracket-predictor pair per nesting level.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .combine import CombineMethod, majority_vote
from .errors import ConfigError, DomainError
from .features import (
    FeatureTemplate,
    Token,
    compress_mapped,
    extract,
    np_head,
    parse_template,
)
from .learner import Instance, LearnerConfig, Model, PAD, classify_labels, train
from .schemes import (
    ChunkSpan,
    ClauseNode,
    MatchMode,
    Scheme,
    balance_brackets,
    balance_clauses,
    clause_spans,
    convert,
    decode,
    encode,
    mark_type,
)

Sentence = list[Token]


class TypeStrategy(Enum):
    SINGLE_PHASE = "single_phase"
    DOUBLE_PHASE = "double_phase"
    N_PHASE = "n_phase"


# Best feature sets found per representation and pass for noun phrase work.
DEFAULT_PASS1 = {
    Scheme.IOB1: parse_template("w[-4..0] p[-2..3]"),
    Scheme.IOB2: parse_template("w[-1..0] p[-4..3]"),
    Scheme.IOE1: parse_template("w[0..1] p[-3..3]"),
    Scheme.IOE2: parse_template("w[-3..4] p[-4..4]"),
    Scheme.O: parse_template("w[-2..0] p[-4..3]"),
    Scheme.C: parse_template("w[0..4] p[-4..4]"),
}
DEFAULT_PASS2 = {
    Scheme.IOB1: parse_template("w[-2..0] p[-4..3] c[-2,-1,1,2]"),
    Scheme.IOB2: parse_template("w[-1..0] p[-4..2] c[-1,1,2]"),
    Scheme.IOE1: parse_template("w[0..1] p[-3..3] c[-1,1,2]"),
    Scheme.IOE2: parse_template("w[0..1] p[-1..3] c[-2,-1,1,2]"),
    Scheme.O: parse_template("w[-1,0] p[-4..1] c[-1,2]"),
    Scheme.C: parse_template("w[0..2] p[-4..2] c[-2,-1,1]"),
}


@dataclass(frozen=True)
class PipelineConfig:
    representations: tuple[Scheme, ...] = (Scheme.IOB1, Scheme.IOE2, Scheme.OC)
    pass1_templates: Mapping[Scheme, FeatureTemplate] = field(
        default_factory=lambda: dict(DEFAULT_PASS1)
    )
    pass2_templates: Mapping[Scheme, FeatureTemplate] = field(
        default_factory=lambda: dict(DEFAULT_PASS2)
    )
    type_strategy: TypeStrategy = TypeStrategy.DOUBLE_PHASE
    combiner: CombineMethod = CombineMethod.MAJORITY
    k_chunk: int = 3
    k_parse: int = 1
    max_parse_levels: int = 19
    np_parse_levels: int = 6
    typed: bool = False
    default_type: str = "NP"
    match_mode: MatchMode = MatchMode.SAME_TYPE
    level_template: FeatureTemplate = field(
        default_factory=lambda: parse_template("w[-2..2] p[-2..2]")
    )
    head_rule: str = "default"

    def __post_init__(self):
        if not self.representations:
            raise ConfigError("need at least one representation")
        if len(self.representations) % 2 == 0:
            warnings.warn(
                "even number of representations; majority voting prefers odd",
                stacklevel=2,
            )


def _streams_for(rep: Scheme) -> tuple[Scheme, ...]:
    return (Scheme.O, Scheme.C) if rep is Scheme.OC else (rep,)


def _chunk_learner(config: PipelineConfig) -> LearnerConfig:
    return LearnerConfig(k=config.k_chunk)


# ---------------------------------------------------------------------------
# Two-pass per-representation taggers.


@dataclass
class TwoPassStream:
    """One data representation's tagger: a first pass over words and POS tags
    and an optional second pass that also sees the first pass's output."""

    scheme: Scheme
    pass1_template: FeatureTemplate
    pass1_model: Model
    pass2_template: FeatureTemplate | None = None
    pass2_model: Model | None = None

    def tag_corpus(self, sentences: Sequence[Sentence]) -> list[list[str]]:
        bounds = []
        feats: list[tuple[str, ...]] = []
        for s in sentences:
            lo = len(feats)
            feats.extend(extract(s, i, self.pass1_template) for i in range(len(s)))
            bounds.append((lo, len(feats)))
        labels = classify_labels(self.pass1_model, feats)
        tags = [labels[a:b] for a, b in bounds]
        if self.pass2_model is None:
            return tags
        feats2: list[tuple[str, ...]] = []
        for s, stags in zip(sentences, tags):
            ctx = [replace(t, chunk_tag=tag) for t, tag in zip(s, stags)]
            feats2.extend(extract(ctx, i, self.pass2_template) for i in range(len(ctx)))
        labels2 = classify_labels(self.pass2_model, feats2)
        return [labels2[a:b] for a, b in bounds]


@dataclass
class OracleStream:
    """Replays gold tags; stands in for a trained stream in plumbing tests."""

    scheme: Scheme
    gold: Sequence[Sequence[ChunkSpan]]
    typed: bool = False

    def tag_corpus(self, sentences: Sequence[Sentence]) -> list[list[str]]:
        if len(sentences) != len(self.gold):
            raise DomainError("oracle gold not aligned with corpus")
        return [
            encode(spans, self.scheme, len(s), typed=self.typed)
            for s, spans in zip(sentences, self.gold)
        ]


def train_two_pass_stream(
    sentences: Sequence[Sentence],
    gold: Sequence[Iterable[ChunkSpan]],
    scheme: Scheme,
    pass1_template: FeatureTemplate,
    pass2_template: FeatureTemplate | None,
    learner_config: LearnerConfig,
    typed: bool = False,
) -> TwoPassStream:
    """Train both passes.  Second-pass training rows read the *corpus* tags as
    context; at test time the first pass's predictions take their place."""
    gold_tags = [
        encode(spans, scheme, len(s), typed=typed) for s, spans in zip(sentences, gold)
    ]
    inst1 = [
        Instance(extract(s, i, pass1_template), tags[i])
        for s, tags in zip(sentences, gold_tags)
        for i in range(len(s))
    ]
    model1 = train(inst1, learner_config)
    model2 = None
    if pass2_template is not None and pass2_template.chunks:
        inst2 = []
        for s, tags in zip(sentences, gold_tags):
            ctx = [replace(t, chunk_tag=tag) for t, tag in zip(s, tags)]
            inst2.extend(
                Instance(extract(ctx, i, pass2_template), tags[i])
                for i in range(len(ctx))
            )
        model2 = train(inst2, learner_config)
    return TwoPassStream(
        scheme=scheme,
        pass1_template=pass1_template,
        pass1_model=model1,
        pass2_template=pass2_template if model2 is not None else None,
        pass2_model=model2,
    )


# ---------------------------------------------------------------------------
# Multi-representation chunking with bracket-stream voting.


@dataclass
class Chunker:
    """Per-stream taggers plus the configuration that combines them."""

    streams: dict[Scheme, object]  # TwoPassStream or anything with tag_corpus
    config: PipelineConfig


def train_chunker(
    sentences: Sequence[Sentence],
    gold: Sequence[Iterable[ChunkSpan]],
    config: PipelineConfig | None = None,
    learner_config: LearnerConfig | None = None,
) -> Chunker:
    config = config or PipelineConfig()
    learner_config = learner_config or _chunk_learner(config)
    streams: dict[Scheme, object] = {}
    for rep in config.representations:
        for scheme in _streams_for(rep):
            if scheme in streams:
                continue
            streams[scheme] = train_two_pass_stream(
                sentences,
                gold,
                scheme,
                config.pass1_templates[scheme],
                config.pass2_templates.get(scheme),
                learner_config,
                typed=config.typed,
            )
    return Chunker(streams=streams, config=config)


def _rep_bracket_streams(chunker: Chunker, sentences, rep: Scheme):
    """This representation's output as (open tags, close tags) per sentence."""
    cfg = chunker.config
    if rep is Scheme.OC:
        o = chunker.streams[Scheme.O].tag_corpus(sentences)
        c = chunker.streams[Scheme.C].tag_corpus(sentences)
        return o, c
    tags = chunker.streams[rep].tag_corpus(sentences)
    opens = [convert(t, rep, Scheme.O, cfg.default_type) for t in tags]
    closes = [convert(t, rep, Scheme.C, cfg.default_type) for t in tags]
    return opens, closes


def _spans_of_rep(chunker: Chunker, sentences, rep: Scheme):
    cfg = chunker.config
    if rep is Scheme.OC:
        opens, closes = _rep_bracket_streams(chunker, sentences, rep)
        return [
            balance_brackets(
                [mark_type(t, cfg.default_type) for t in o],
                [mark_type(t, cfg.default_type) for t in c],
                cfg.match_mode,
            )
            for o, c in zip(opens, closes)
        ]
    tags = chunker.streams[rep].tag_corpus(sentences)
    return [decode(t, rep, cfg.default_type) for t in tags]


def chunk_corpus_detail(chunker: Chunker, sentences: Sequence[Sentence]):
    """Combined spans plus each representation's own spans (for comparison)."""
    cfg = chunker.config
    if cfg.combiner is not CombineMethod.MAJORITY:
        # weighted combiners need tuning outputs; they live in the combine
        # module and the `combine` command
        raise ConfigError(
            f"bracket-stream combination supports majority voting only, "
            f"not {cfg.combiner.value}"
        )
    for rep in cfg.representations:
        for scheme in _streams_for(rep):
            if scheme not in chunker.streams:
                raise ConfigError(f"no model for configured representation {scheme.value}")

    per_rep_brackets = {
        rep: _rep_bracket_streams(chunker, sentences, rep)
        for rep in cfg.representations
    }
    combined = []
    for si, sentence in enumerate(sentences):
        n = len(sentence)
        voted_o, voted_c = [], []
        for i in range(n):
            o_votes = [per_rep_brackets[rep][0][si][i] for rep in cfg.representations]
            c_votes = [per_rep_brackets[rep][1][si][i] for rep in cfg.representations]
            voted_o.append(majority_vote(o_votes))
            voted_c.append(majority_vote(c_votes))
        combined.append(
            balance_brackets(
                [mark_type(t, cfg.default_type) for t in voted_o],
                [mark_type(t, cfg.default_type) for t in voted_c],
                cfg.match_mode,
            )
        )
    individual = {
        rep: _spans_of_rep(chunker, sentences, rep) for rep in cfg.representations
    }
    return combined, individual


def chunk_np(sentences: Sequence[Sentence], chunker: Chunker):
    """Noun-phrase chunk spans per sentence via the five-step voting recipe."""
    return chunk_corpus_detail(chunker, sentences)[0]


# ---------------------------------------------------------------------------
# Typed chunking: three strategies.


@dataclass
class SinglePhaseChunker:
    chunker: Chunker  # trained on typed tags


@dataclass
class DoublePhaseChunker:
    boundary: Chunker  # untyped
    type_model: Model
    head_rule: str = "default"


@dataclass
class NPhaseChunker:
    per_type: dict[str, Chunker]
    type_order: tuple[str, ...]  # descending training frequency


TypedChunker = SinglePhaseChunker | DoublePhaseChunker | NPhaseChunker


def _type_features(sentence: Sentence, spans: list[ChunkSpan], idx: int):
    span = spans[idx]
    chunk = sentence[span.start : span.end + 1]
    head = chunk[np_head(chunk)].word
    pos_seq = "+".join(t.pos for t in chunk)
    prev_head = PAD
    if idx > 0:
        p = spans[idx - 1]
        prev_chunk = sentence[p.start : p.end + 1]
        prev_head = prev_chunk[np_head(prev_chunk)].word
    next_head = PAD
    if idx + 1 < len(spans):
        nx = spans[idx + 1]
        next_chunk = sentence[nx.start : nx.end + 1]
        next_head = next_chunk[np_head(next_chunk)].word
    return (prev_head, head, pos_seq, next_head)


def train_typed_chunker(
    sentences: Sequence[Sentence],
    gold: Sequence[Iterable[ChunkSpan]],
    strategy: TypeStrategy,
    config: PipelineConfig | None = None,
    learner_config: LearnerConfig | None = None,
) -> TypedChunker:
    config = config or PipelineConfig()
    learner_config = learner_config or _chunk_learner(config)
    gold = [sorted(g) for g in gold]

    if strategy is TypeStrategy.SINGLE_PHASE:
        cfg = replace(config, typed=True)
        return SinglePhaseChunker(train_chunker(sentences, gold, cfg, learner_config))

    if strategy is TypeStrategy.DOUBLE_PHASE:
        cfg = replace(config, typed=False, default_type="CH")
        boundary = train_chunker(sentences, gold, cfg, learner_config)
        type_instances = [
            Instance(_type_features(s, spans, i), spans[i].type)
            for s, spans in zip(sentences, gold)
            for i in range(len(spans))
        ]
        type_model = train(type_instances, learner_config)
        return DoublePhaseChunker(boundary=boundary, type_model=type_model)

    # N-phase: one boundary chunker per chunk type.
    freq: dict[str, int] = {}
    for spans in gold:
        for s in spans:
            freq[s.type] = freq.get(s.type, 0) + 1
    order = tuple(sorted(freq, key=lambda t: (-freq[t], t)))
    per_type: dict[str, Chunker] = {}
    for typ in order:
        cfg = replace(config, typed=False, default_type=typ)
        filtered = [[s for s in spans if s.type == typ] for spans in gold]
        per_type[typ] = train_chunker(sentences, filtered, cfg, learner_config)
    return NPhaseChunker(per_type=per_type, type_order=order)


def chunk_typed(sentences: Sequence[Sentence], chunker: TypedChunker):
    """Typed chunk spans per sentence, per the chunker's strategy."""
    if isinstance(chunker, SinglePhaseChunker):
        return chunk_np(sentences, chunker.chunker)

    if isinstance(chunker, DoublePhaseChunker):
        boundaries = chunk_np(sentences, chunker.boundary)
        queries = []
        for s, spans in zip(sentences, boundaries):
            spans = sorted(spans)
            queries.extend(_type_features(s, spans, i) for i in range(len(spans)))
        labels = classify_labels(chunker.type_model, queries)
        out, pos = [], 0
        for spans in boundaries:
            spans = sorted(spans)
            typed = [
                ChunkSpan(s.start, s.end, labels[pos + i])
                for i, s in enumerate(spans)
            ]
            pos += len(spans)
            out.append(typed)
        return out

    # N-phase: run every per-type chunker, then settle token conflicts in
    # favor of the type more frequent in training.
    found = {typ: chunk_np(sentences, ch) for typ, ch in chunker.per_type.items()}
    out = []
    for si in range(len(sentences)):
        taken: list[ChunkSpan] = []
        for typ in chunker.type_order:
            for span in found[typ][si]:
                if not any(
                    span.start <= t.end and t.start <= span.end for t in taken
                ):
                    taken.append(span)
        out.append(sorted(taken))
    return out


# ---------------------------------------------------------------------------
# Clause identification.


def _default_open_templates() -> tuple[FeatureTemplate, ...]:
    # three information-pair learners, context one
    return (
        parse_template("w[-1..1] p[-1..1]"),
        parse_template("w[-1..1] c[-1,1]"),
        parse_template("p[-1..1] c[-1,1]"),
    )


@dataclass(frozen=True)
class ClauseConfig:
    open_templates: tuple[FeatureTemplate, ...] = field(
        default_factory=_default_open_templates
    )
    close_template: FeatureTemplate = field(
        default_factory=lambda: parse_template("w[-3..3] p[-3..3]")
    )
    head_rule: str = "default"


def _chunk_spans_of(sentence: Sentence) -> list[ChunkSpan]:
    tags = []
    for tok in sentence:
        if tok.chunk_tag is None:
            raise DomainError("clause identification requires chunk annotations")
        tags.append(tok.chunk_tag)
    return decode(tags, Scheme.IOB1)


@dataclass
class ClauseBracketer:
    """Open brackets from a majority of three taggers over the raw tokens;
    close brackets from one tagger over the chunk-compressed sentence."""

    config: ClauseConfig
    open_models: tuple[Model, ...]
    close_model: Model

    def predict_opens(self, sentences: Sequence[Sentence]) -> list[list[int]]:
        votes_per_model = []
        bounds = []
        feats_all: list[list[tuple[str, ...]]] = [[] for _ in self.open_models]
        for s in sentences:
            lo = len(feats_all[0])
            for m, template in enumerate(self.config.open_templates):
                feats_all[m].extend(extract(s, i, template) for i in range(len(s)))
            bounds.append((lo, lo + len(s)))
        for model, feats in zip(self.open_models, feats_all):
            votes_per_model.append(classify_labels(model, feats))
        out = []
        for a, b in bounds:
            opens = []
            for i in range(a, b):
                tag = majority_vote([votes[i] for votes in votes_per_model])
                if tag == "(":
                    opens.append(i - a)
            out.append(opens)
        return out

    def predict_closes(self, sentences: Sequence[Sentence]) -> list[list[int]]:
        feats = []
        meta = []  # (sentence index, origin end) per compressed token
        for si, s in enumerate(sentences):
            chunks = _chunk_spans_of(s)
            compressed, origins = compress_mapped(s, chunks, self.config.head_rule)
            for i in range(len(compressed)):
                feats.append(extract(compressed, i, self.config.close_template))
                meta.append((si, origins[i][1]))
        labels = classify_labels(self.close_model, feats)
        out: list[list[int]] = [[] for _ in sentences]
        for (si, end), tag in zip(meta, labels):
            if tag == ")":
                out[si].append(end)
        return out


@dataclass
class OracleClauseBracketer:
    """Replays gold clause bracket positions (closes keep multiplicity)."""

    forests: Sequence[Sequence[ClauseNode]]

    def predict_opens(self, sentences):
        return [
            sorted({s for s, _ in clause_spans(f)}) for f in self.forests
        ]

    def predict_closes(self, sentences):
        return [sorted(e for _, e in clause_spans(f)) for f in self.forests]


def train_clause_bracketer(
    sentences: Sequence[Sentence],
    forests: Sequence[Sequence[ClauseNode]],
    config: ClauseConfig | None = None,
    learner_config: LearnerConfig | None = None,
) -> ClauseBracketer:
    config = config or ClauseConfig()
    learner_config = learner_config or LearnerConfig(k=3)

    open_sets = [{s for s, _ in clause_spans(f)} for f in forests]
    open_models = []
    for template in config.open_templates:
        inst = [
            Instance(
                extract(s, i, template), "(" if i in open_sets[si] else "."
            )
            for si, s in enumerate(sentences)
            for i in range(len(s))
        ]
        open_models.append(train(inst, learner_config))

    close_inst = []
    for si, s in enumerate(sentences):
        ends = {e for _, e in clause_spans(forests[si])}
        chunks = _chunk_spans_of(s)
        compressed, origins = compress_mapped(s, chunks, config.head_rule)
        for i in range(len(compressed)):
            a, b = origins[i]
            label = ")" if any(a <= e <= b for e in ends) else "."
            close_inst.append(Instance(extract(compressed, i, config.close_template), label))
    close_model = train(close_inst, learner_config)
    return ClauseBracketer(
        config=config, open_models=tuple(open_models), close_model=close_model
    )


def identify_clauses(sentences: Sequence[Sentence], bracketer) -> list[list[ClauseNode]]:
    """Predict open/close positions per token, then repair them into forests."""
    opens = bracketer.predict_opens(sentences)
    closes = bracketer.predict_closes(sentences)
    return [
        balance_clauses(o, c, len(s)) for s, o, c in zip(sentences, opens, closes)
    ]


# ---------------------------------------------------------------------------
# Cascaded parsing: repeat compress-and-chunk, one bracket pair per level.


@dataclass
class BracketLevel:
    """Open/close mark predictors for one nesting level."""

    open_template: FeatureTemplate
    open_model: Model
    close_template: FeatureTemplate
    close_model: Model
    default_type: str = "NP"

    def predict(self, batch):
        feats_o, feats_c, bounds = [], [], []
        for tokens, _origin, _si in batch:
            lo = len(feats_o)
            feats_o.extend(extract(tokens, i, self.open_template) for i in range(len(tokens)))
            feats_c.extend(extract(tokens, i, self.close_template) for i in range(len(tokens)))
            bounds.append((lo, len(feats_o)))
        otags = classify_labels(self.open_model, feats_o)
        ctags = classify_labels(self.close_model, feats_c)
        out = []
        for a, b in bounds:
            out.append(
                (
                    [mark_type(t, self.default_type) for t in otags[a:b]],
                    [mark_type(t, self.default_type) for t in ctags[a:b]],
                )
            )
        return out


@dataclass
class OracleBracketLevel:
    """Emits the innermost gold spans representable in the current tokens."""

    gold: Sequence[Iterable[ChunkSpan]]

    def predict(self, batch):
        out = []
        for tokens, origin, si in batch:
            start_at = {origin[j][0]: j for j in range(len(origin))}
            end_at = {origin[j][1]: j for j in range(len(origin))}
            current = {
                (origin[j][0], origin[j][1]) for j in range(len(origin))
            }
            candidates = []
            for span in self.gold[si]:
                if (span.start, span.end) in current:
                    continue  # already a single token
                if span.start in start_at and span.end in end_at:
                    candidates.append(span)
            innermost = [
                s
                for s in candidates
                if not any(
                    t is not s and t.start >= s.start and t.end <= s.end
                    for t in candidates
                )
            ]
            opens: list[str | None] = [None] * len(tokens)
            closes: list[str | None] = [None] * len(tokens)
            for s in innermost:
                opens[start_at[s.start]] = s.type
                closes[end_at[s.end]] = s.type
            out.append((opens, closes))
        return out


@dataclass
class _CascadeState:
    tokens: list[Token]
    origin: list[tuple[int, int]]
    top: list[ChunkSpan]
    spans: set[ChunkSpan]
    length: int
    done: bool = False


def _run_cascade(
    sentences: Sequence[Sentence],
    base_spans: Sequence[Iterable[ChunkSpan]],
    levels: Sequence,
    head_rule: str,
    match_mode: MatchMode,
    early_stop: bool,
):
    states = [
        _CascadeState(
            tokens=list(s),
            origin=[(i, i) for i in range(len(s))],
            top=sorted(spans),
            spans=set(spans),
            length=len(s),
        )
        for s, spans in zip(sentences, base_spans)
    ]
    snapshots = [[sorted(st.spans) for st in states]]
    for level in levels:
        if level is None:
            warnings.warn("missing level model; cascade stops early", stacklevel=2)
            break
        active = [i for i, st in enumerate(states) if not st.done]
        if active:
            for i in active:
                st = states[i]
                new_tokens, rel = compress_mapped(st.tokens, st.top, head_rule)
                st.origin = [
                    (st.origin[a][0], st.origin[b][1]) for a, b in rel
                ]
                st.tokens = new_tokens
            batch = [(states[i].tokens, states[i].origin, i) for i in active]
            for i, (omarks, cmarks) in zip(active, level.predict(batch)):
                st = states[i]
                found = balance_brackets(omarks, cmarks, match_mode)
                mapped = {
                    ChunkSpan(st.origin[s.start][0], st.origin[s.end][1], s.type)
                    for s in found
                }
                new = mapped - st.spans
                if new:
                    st.spans |= new
                    st.top = found
                else:
                    st.top = found
                    if early_stop:
                        st.done = True
        snapshots.append([sorted(st.spans) for st in states])
    return states, snapshots


@dataclass
class NpParser:
    base: Chunker
    levels: list[BracketLevel | OracleBracketLevel | None]
    head_rule: str = "default"
    match_mode: MatchMode = MatchMode.SAME_TYPE


def parse_np(sentences: Sequence[Sentence], parser: NpParser):
    """Nested noun-phrase span sets found by repeated chunking."""
    base = chunk_np(sentences, parser.base)
    states, _ = _run_cascade(
        sentences, base, parser.levels, parser.head_rule, parser.match_mode, True
    )
    return [sorted(st.spans) for st in states]


@dataclass
class FullParser:
    base: TypedChunker
    levels: list[BracketLevel | OracleBracketLevel | None]
    head_rule: str = "default"
    match_mode: MatchMode = MatchMode.SAME_TYPE
    wrap_label: str = "S"


def _wrap_roots(states: list[_CascadeState], label: str):
    out = []
    for st in states:
        spans = set(st.spans)
        root = ChunkSpan(0, st.length - 1, label)
        if st.length and not any(
            s.start == 0 and s.end == st.length - 1 and s.type == label for s in spans
        ):
            spans.add(root)
        out.append(sorted(spans))
    return out


def parse_full(sentences: Sequence[Sentence], parser: FullParser):
    """Typed parse span sets; every sentence ends up under a clause root."""
    spans, _ = parse_full_levels(sentences, parser)
    return spans


def parse_full_levels(sentences: Sequence[Sentence], parser: FullParser):
    """Like ``parse_full`` but also returns the per-level cumulative span sets
    (base first, final wrapped result last)."""
    base = chunk_typed(sentences, parser.base)
    states, snapshots = _run_cascade(
        sentences, base, parser.levels, parser.head_rule, parser.match_mode, False
    )
    wrapped = _wrap_roots(states, parser.wrap_label)
    snapshots.append(wrapped)
    return wrapped, snapshots


# ---------------------------------------------------------------------------
# Level stratification and parser training.


def stratify_levels(spans: Iterable[ChunkSpan]) -> dict[int, list[ChunkSpan]]:
    """Group spans of one sentence by height: leaves at level 0, a span one
    above the highest span it contains."""
    spans = sorted(set(spans), key=lambda s: (s.end - s.start, s.start))
    levels: dict[ChunkSpan, int] = {}
    for s in spans:
        inside = [
            levels[t]
            for t in levels
            if t.start >= s.start and t.end <= s.end and t != s
        ]
        levels[s] = 1 + max(inside) if inside else 0
    out: dict[int, list[ChunkSpan]] = {}
    for s, lvl in levels.items():
        out.setdefault(lvl, []).append(s)
    return {lvl: sorted(group) for lvl, group in out.items()}


def _level_views(sentence: Sentence, by_level: dict[int, list[ChunkSpan]], level: int, head_rule: str):
    """Tokens compressed by all structure below ``level`` plus the position
    map from original indices into the compressed sentence."""
    tokens = list(sentence)
    orig2cur = list(range(len(sentence)))
    for l in range(level):
        here = by_level.get(l, [])
        cur_spans = [
            ChunkSpan(orig2cur[s.start], orig2cur[s.end], s.type) for s in here
        ]
        tokens, rel = compress_mapped(tokens, cur_spans, head_rule)
        back = {}
        for j, (a, b) in enumerate(rel):
            for c in range(a, b + 1):
                back[c] = j
        orig2cur = [back[c] for c in orig2cur]
    return tokens, orig2cur


def train_bracket_level(
    sentences: Sequence[Sentence],
    stratified: Sequence[dict[int, list[ChunkSpan]]],
    level: int,
    template: FeatureTemplate,
    learner_config: LearnerConfig,
    typed: bool,
    head_rule: str = "default",
    default_type: str = "NP",
) -> BracketLevel | None:
    """Train one level's open/close predictors on brackets of that level only,
    over sentences compressed by the gold structure below it."""
    inst_o, inst_c = [], []
    seen_any = False
    for s, by_level in zip(sentences, stratified):
        tokens, orig2cur = _level_views(s, by_level, level, head_rule)
        spans = by_level.get(level, [])
        if spans:
            seen_any = True
        opens = {orig2cur[sp.start]: sp.type for sp in spans}
        closes = {orig2cur[sp.end]: sp.type for sp in spans}
        for i in range(len(tokens)):
            feats = extract(tokens, i, template)
            otag = ctag = "."
            if i in opens:
                otag = f"(-{opens[i]}" if typed else "("
            if i in closes:
                ctag = f")-{closes[i]}" if typed else ")"
            inst_o.append(Instance(feats, otag))
            inst_c.append(Instance(feats, ctag))
    if not seen_any:
        return None
    return BracketLevel(
        open_template=template,
        open_model=train(inst_o, learner_config),
        close_template=template,
        close_model=train(inst_c, learner_config),
        default_type=default_type,
    )


def train_np_parser(
    sentences: Sequence[Sentence],
    gold: Sequence[Iterable[ChunkSpan]],
    config: PipelineConfig | None = None,
    learner_config: LearnerConfig | None = None,
) -> NpParser:
    """Base chunker on the lowest noun phrases plus one bracket-predictor pair
    per nesting level, each trained on its own level's brackets only."""
    config = config or PipelineConfig()
    stratified = [stratify_levels(g) for g in gold]
    base_gold = [by.get(0, []) for by in stratified]
    base = train_chunker(
        sentences, base_gold, replace(config, typed=False), learner_config or _chunk_learner(config)
    )
    level_cfg = learner_config or LearnerConfig(k=config.k_parse)
    levels = []
    for level in range(1, config.np_parse_levels + 1):
        lm = train_bracket_level(
            sentences,
            stratified,
            level,
            config.level_template,
            level_cfg,
            typed=False,
            head_rule=config.head_rule,
            default_type=config.default_type,
        )
        if lm is None:
            break
        levels.append(lm)
    return NpParser(base=base, levels=levels, head_rule=config.head_rule,
                    match_mode=config.match_mode)


def train_full_parser(
    sentences: Sequence[Sentence],
    gold: Sequence[Iterable[ChunkSpan]],
    config: PipelineConfig | None = None,
    learner_config: LearnerConfig | None = None,
) -> FullParser:
    config = config or PipelineConfig()
    stratified = [stratify_levels(g) for g in gold]
    base_gold = [by.get(0, []) for by in stratified]
    base = train_typed_chunker(
        sentences,
        base_gold,
        config.type_strategy,
        config,
        learner_config or _chunk_learner(config),
    )
    level_cfg = learner_config or LearnerConfig(k=config.k_parse)
    levels = []
    for level in range(1, config.max_parse_levels + 1):
        lm = train_bracket_level(
            sentences,
            stratified,
            level,
            config.level_template,
            level_cfg,
            typed=True,
            head_rule=config.head_rule,
            default_type=config.default_type,
        )
        if lm is None:
            break
        levels.append(lm)
    return FullParser(base=base, levels=levels, head_rule=config.head_rule,
                      match_mode=config.match_mode)
