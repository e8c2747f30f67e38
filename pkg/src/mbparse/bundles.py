"""Saving and loading composite models as a directory of model files.

A bundle directory holds one ``manifest`` (INI) describing the composite
plus one line-format model file per component.  Reloaded bundles behave
extensionally the same as the originals.
"""

from __future__ import annotations

import configparser
import os

from .errors import DomainError
from .features import parse_template, format_template
from .learner import load_model, save_model
from .pipeline import (
    BracketLevel,
    Chunker,
    ClauseBracketer,
    ClauseConfig,
    DoublePhaseChunker,
    FullParser,
    NpParser,
    NPhaseChunker,
    PipelineConfig,
    SinglePhaseChunker,
    TwoPassStream,
    TypedChunker,
)
from .schemes import MatchMode, Scheme

_FORMAT = "1"


def _new_manifest() -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    return parser


def _read_manifest(path) -> configparser.ConfigParser:
    parser = _new_manifest()
    manifest = os.path.join(path, "manifest")
    if not os.path.isfile(manifest):
        raise DomainError(f"{path}: not a model bundle (no manifest)")
    with open(manifest, "r", encoding="utf-8") as fh:
        parser.read_file(fh)
    if parser.get("bundle", "format", fallback=None) != _FORMAT:
        raise DomainError(f"{path}: unsupported bundle format")
    return parser


def _write_manifest(parser: configparser.ConfigParser, path) -> None:
    with open(os.path.join(path, "manifest"), "w", encoding="utf-8") as fh:
        parser.write(fh)


def _save_stream(stream: TwoPassStream, path, prefix: str, manifest) -> None:
    section = f"stream {prefix}"
    manifest.add_section(section)
    manifest[section]["scheme"] = stream.scheme.value
    manifest[section]["pass1_template"] = format_template(stream.pass1_template)
    manifest[section]["pass1_model"] = f"{prefix}.pass1.model"
    save_model(stream.pass1_model, os.path.join(path, f"{prefix}.pass1.model"))
    if stream.pass2_model is not None:
        manifest[section]["pass2_template"] = format_template(stream.pass2_template)
        manifest[section]["pass2_model"] = f"{prefix}.pass2.model"
        save_model(stream.pass2_model, os.path.join(path, f"{prefix}.pass2.model"))


def _load_stream(path, prefix: str, manifest) -> TwoPassStream:
    section = manifest[f"stream {prefix}"]
    pass2_model = None
    pass2_template = None
    if "pass2_model" in section:
        pass2_model = load_model(os.path.join(path, section["pass2_model"]))
        pass2_template = parse_template(section["pass2_template"])
    return TwoPassStream(
        scheme=Scheme(section["scheme"]),
        pass1_template=parse_template(section["pass1_template"]),
        pass1_model=load_model(os.path.join(path, section["pass1_model"])),
        pass2_template=pass2_template,
        pass2_model=pass2_model,
    )


def _save_chunker_into(chunker: Chunker, path, prefix: str, manifest) -> None:
    section = f"chunker {prefix}" if prefix else "chunker"
    manifest.add_section(section)
    cfg = chunker.config
    manifest[section]["representations"] = " ".join(
        r.value for r in cfg.representations
    )
    manifest[section]["typed"] = str(int(cfg.typed))
    manifest[section]["default_type"] = cfg.default_type
    manifest[section]["match_mode"] = cfg.match_mode.value
    manifest[section]["streams"] = " ".join(s.value for s in chunker.streams)
    for scheme in chunker.streams:
        name = f"{prefix}.{scheme.value}" if prefix else scheme.value
        _save_stream(chunker.streams[scheme], path, name, manifest)


def _load_chunker_from(path, prefix: str, manifest) -> Chunker:
    section = manifest[f"chunker {prefix}" if prefix else "chunker"]
    reps = tuple(Scheme(v) for v in section["representations"].split())
    cfg = PipelineConfig(
        representations=reps,
        typed=bool(int(section["typed"])),
        default_type=section["default_type"],
        match_mode=MatchMode(section["match_mode"]),
    )
    streams = {}
    for value in section["streams"].split():
        scheme = Scheme(value)
        name = f"{prefix}.{value}" if prefix else value
        streams[scheme] = _load_stream(path, name, manifest)
    return Chunker(streams=streams, config=cfg)


def _start_bundle(path, kind: str) -> configparser.ConfigParser:
    os.makedirs(path, exist_ok=True)
    manifest = _new_manifest()
    manifest.add_section("bundle")
    manifest["bundle"]["format"] = _FORMAT
    manifest["bundle"]["kind"] = kind
    return manifest


def _check_kind(manifest, path, kind: str) -> None:
    actual = manifest["bundle"]["kind"]
    if actual != kind:
        raise DomainError(f"{path}: bundle holds a {actual}, expected {kind}")


def save_chunker(chunker: Chunker, path) -> None:
    manifest = _start_bundle(path, "chunker")
    _save_chunker_into(chunker, path, "", manifest)
    _write_manifest(manifest, path)


def load_chunker(path) -> Chunker:
    manifest = _read_manifest(path)
    _check_kind(manifest, path, "chunker")
    return _load_chunker_from(path, "", manifest)


def save_typed_chunker(chunker: TypedChunker, path) -> None:
    manifest = _start_bundle(path, "typed-chunker")
    if isinstance(chunker, SinglePhaseChunker):
        manifest["bundle"]["strategy"] = "single_phase"
        _save_chunker_into(chunker.chunker, path, "typed", manifest)
    elif isinstance(chunker, DoublePhaseChunker):
        manifest["bundle"]["strategy"] = "double_phase"
        _save_chunker_into(chunker.boundary, path, "boundary", manifest)
        manifest["bundle"]["type_model"] = "type.model"
        save_model(chunker.type_model, os.path.join(path, "type.model"))
    elif isinstance(chunker, NPhaseChunker):
        manifest["bundle"]["strategy"] = "n_phase"
        manifest["bundle"]["types"] = " ".join(chunker.type_order)
        for typ in chunker.type_order:
            _save_chunker_into(chunker.per_type[typ], path, f"type-{typ}", manifest)
    else:
        raise DomainError(f"unknown typed chunker {type(chunker).__name__}")
    _write_manifest(manifest, path)


def load_typed_chunker(path) -> TypedChunker:
    manifest = _read_manifest(path)
    _check_kind(manifest, path, "typed-chunker")
    strategy = manifest["bundle"]["strategy"]
    if strategy == "single_phase":
        return SinglePhaseChunker(_load_chunker_from(path, "typed", manifest))
    if strategy == "double_phase":
        return DoublePhaseChunker(
            boundary=_load_chunker_from(path, "boundary", manifest),
            type_model=load_model(os.path.join(path, manifest["bundle"]["type_model"])),
        )
    order = tuple(manifest["bundle"]["types"].split())
    per_type = {
        typ: _load_chunker_from(path, f"type-{typ}", manifest) for typ in order
    }
    return NPhaseChunker(per_type=per_type, type_order=order)


def save_clause_bracketer(bracketer: ClauseBracketer, path) -> None:
    manifest = _start_bundle(path, "clauses")
    manifest["bundle"]["open_templates"] = " | ".join(
        format_template(t) for t in bracketer.config.open_templates
    )
    manifest["bundle"]["close_template"] = format_template(
        bracketer.config.close_template
    )
    manifest["bundle"]["head_rule"] = bracketer.config.head_rule
    manifest["bundle"]["open_models"] = " ".join(
        f"open{i}.model" for i in range(len(bracketer.open_models))
    )
    for i, model in enumerate(bracketer.open_models):
        save_model(model, os.path.join(path, f"open{i}.model"))
    manifest["bundle"]["close_model"] = "close.model"
    save_model(bracketer.close_model, os.path.join(path, "close.model"))
    _write_manifest(manifest, path)


def load_clause_bracketer(path) -> ClauseBracketer:
    manifest = _read_manifest(path)
    _check_kind(manifest, path, "clauses")
    config = ClauseConfig(
        open_templates=tuple(
            parse_template(t)
            for t in manifest["bundle"]["open_templates"].split(" | ")
        ),
        close_template=parse_template(manifest["bundle"]["close_template"]),
        head_rule=manifest["bundle"]["head_rule"],
    )
    open_models = tuple(
        load_model(os.path.join(path, name))
        for name in manifest["bundle"]["open_models"].split()
    )
    close_model = load_model(os.path.join(path, manifest["bundle"]["close_model"]))
    return ClauseBracketer(
        config=config, open_models=open_models, close_model=close_model
    )


def _save_levels(levels, path, manifest) -> None:
    manifest["bundle"]["levels"] = str(len(levels))
    for i, level in enumerate(levels, 1):
        section = f"level {i}"
        manifest.add_section(section)
        manifest[section]["open_template"] = format_template(level.open_template)
        manifest[section]["close_template"] = format_template(level.close_template)
        manifest[section]["default_type"] = level.default_type
        manifest[section]["open_model"] = f"level{i:02d}.open.model"
        manifest[section]["close_model"] = f"level{i:02d}.close.model"
        save_model(level.open_model, os.path.join(path, f"level{i:02d}.open.model"))
        save_model(level.close_model, os.path.join(path, f"level{i:02d}.close.model"))


def _load_levels(path, manifest) -> list[BracketLevel]:
    count = int(manifest["bundle"]["levels"])
    levels = []
    for i in range(1, count + 1):
        section = manifest[f"level {i}"]
        levels.append(
            BracketLevel(
                open_template=parse_template(section["open_template"]),
                open_model=load_model(os.path.join(path, section["open_model"])),
                close_template=parse_template(section["close_template"]),
                close_model=load_model(os.path.join(path, section["close_model"])),
                default_type=section["default_type"],
            )
        )
    return levels


def save_np_parser(parser: NpParser, path) -> None:
    manifest = _start_bundle(path, "np-parser")
    manifest["bundle"]["head_rule"] = parser.head_rule
    manifest["bundle"]["match_mode"] = parser.match_mode.value
    _save_chunker_into(parser.base, path, "base", manifest)
    _save_levels(parser.levels, path, manifest)
    _write_manifest(manifest, path)


def load_np_parser(path) -> NpParser:
    manifest = _read_manifest(path)
    _check_kind(manifest, path, "np-parser")
    return NpParser(
        base=_load_chunker_from(path, "base", manifest),
        levels=_load_levels(path, manifest),
        head_rule=manifest["bundle"]["head_rule"],
        match_mode=MatchMode(manifest["bundle"]["match_mode"]),
    )


def save_full_parser(parser: FullParser, path) -> None:
    manifest = _start_bundle(path, "full-parser")
    manifest["bundle"]["head_rule"] = parser.head_rule
    manifest["bundle"]["match_mode"] = parser.match_mode.value
    manifest["bundle"]["wrap_label"] = parser.wrap_label
    # reuse the typed-chunker layout for the base
    if isinstance(parser.base, SinglePhaseChunker):
        manifest["bundle"]["strategy"] = "single_phase"
        _save_chunker_into(parser.base.chunker, path, "typed", manifest)
    elif isinstance(parser.base, DoublePhaseChunker):
        manifest["bundle"]["strategy"] = "double_phase"
        _save_chunker_into(parser.base.boundary, path, "boundary", manifest)
        manifest["bundle"]["type_model"] = "type.model"
        save_model(parser.base.type_model, os.path.join(path, "type.model"))
    elif isinstance(parser.base, NPhaseChunker):
        manifest["bundle"]["strategy"] = "n_phase"
        manifest["bundle"]["types"] = " ".join(parser.base.type_order)
        for typ in parser.base.type_order:
            _save_chunker_into(parser.base.per_type[typ], path, f"type-{typ}", manifest)
    else:
        raise DomainError(f"unknown base chunker {type(parser.base).__name__}")
    _save_levels(parser.levels, path, manifest)
    _write_manifest(manifest, path)


def load_full_parser(path) -> FullParser:
    manifest = _read_manifest(path)
    _check_kind(manifest, path, "full-parser")
    strategy = manifest["bundle"]["strategy"]
    if strategy == "single_phase":
        base: TypedChunker = SinglePhaseChunker(
            _load_chunker_from(path, "typed", manifest)
        )
    elif strategy == "double_phase":
        base = DoublePhaseChunker(
            boundary=_load_chunker_from(path, "boundary", manifest),
            type_model=load_model(os.path.join(path, manifest["bundle"]["type_model"])),
        )
    else:
        order = tuple(manifest["bundle"]["types"].split())
        base = NPhaseChunker(
            per_type={
                typ: _load_chunker_from(path, f"type-{typ}", manifest)
                for typ in order
            },
            type_order=order,
        )
    return FullParser(
        base=base,
        levels=_load_levels(path, manifest),
        head_rule=manifest["bundle"]["head_rule"],
        match_mode=MatchMode(manifest["bundle"]["match_mode"]),
        wrap_label=manifest["bundle"]["wrap_label"],
    )
