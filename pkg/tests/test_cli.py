import pytest

from mbparse.cli import main, run_command
from mbparse.corpus import encode_bracket_column, encode_clause_column, write_corpus
from mbparse.errors import ConfigError
from mbparse.schemes import Scheme, encode
from mbparse.synth import clause_corpus, np_chunk_corpus, parse_corpus, typed_chunk_corpus


def dump_chunk_file(path, sentences, gold, typed=False):
    rows = []
    for s, g in zip(sentences, gold):
        tags = encode(g, Scheme.IOB1, len(s), typed=typed)
        rows.append([(t.word, t.pos, tag) for t, tag in zip(s, tags)])
    write_corpus(rows, path, columns=("word", "pos", "chunk"))


def dump_tree_file(path, sentences, gold):
    rows = []
    for s, g in zip(sentences, gold):
        cells = encode_bracket_column(g, len(s))
        rows.append([(t.word, t.pos, c) for t, c in zip(s, cells)])
    write_corpus(rows, path, columns=("word", "pos", "tree"))


@pytest.fixture(scope="module")
def toy(tmp_path_factory):
    d = tmp_path_factory.mktemp("toy")
    tr_s, tr_g = np_chunk_corpus(60, seed=41)
    te_s, te_g = np_chunk_corpus(20, seed=42)
    dump_chunk_file(d / "train.txt", tr_s, tr_g)
    dump_chunk_file(d / "gold.txt", te_s, te_g)
    return d


class TestChunkFlow:
    def test_train_chunk_evaluate(self, toy, capsys):
        assert run_command(
            ["train", "--task", "np-chunk", "--train", str(toy / "train.txt"),
             "--model", str(toy / "model"), "--workers", "1"]
        ) == 0
        assert run_command(
            ["chunk", "--model", str(toy / "model"), "--input", str(toy / "gold.txt"),
             "--output", str(toy / "out.txt"), "--workers", "1"]
        ) == 0
        assert run_command(
            ["evaluate", "--found", str(toy / "out.txt"), "--gold", str(toy / "gold.txt")]
        ) == 0
        printed = capsys.readouterr().out
        assert "F " in printed

    def test_identical_files_score_hundred(self, toy, capsys):
        assert run_command(
            ["evaluate", "--found", str(toy / "gold.txt"), "--gold", str(toy / "gold.txt")]
        ) == 0
        assert "F 100.00" in capsys.readouterr().out

    def test_outputs_byte_identical_across_runs(self, toy):
        for name in ("a.txt", "b.txt"):
            run_command(
                ["chunk", "--model", str(toy / "model"), "--input", str(toy / "gold.txt"),
                 "--output", str(toy / name), "--workers", "1"]
            )
        assert (toy / "a.txt").read_bytes() == (toy / "b.txt").read_bytes()

    def test_worker_pool_matches_serial(self, toy):
        run_command(
            ["chunk", "--model", str(toy / "model"), "--input", str(toy / "gold.txt"),
             "--output", str(toy / "par.txt"), "--workers", "3"]
        )
        assert (toy / "par.txt").read_bytes() == (toy / "a.txt").read_bytes()

    def test_per_type_and_machine_output(self, toy, capsys):
        run_command(
            ["evaluate", "--found", str(toy / "gold.txt"), "--gold", str(toy / "gold.txt"),
             "--per-type"]
        )
        assert "all" in capsys.readouterr().out
        run_command(
            ["evaluate", "--found", str(toy / "gold.txt"), "--gold", str(toy / "gold.txt"),
             "--machine"]
        )
        out = capsys.readouterr().out
        assert "all\t100.00\t100.00\t100.00" in out

    def test_bootstrap_command(self, toy, capsys):
        assert run_command(
            ["bootstrap", "--found", str(toy / "gold.txt"), "--gold", str(toy / "gold.txt"),
             "--samples", "200", "--seed", "3"]
        ) == 0
        out = capsys.readouterr().out
        assert "stddev 0.00" in out


class TestTypedAndParsers:
    def test_typed_chunk_flow(self, tmp_path, capsys):
        tr_s, tr_g = typed_chunk_corpus(50, seed=43)
        te_s, te_g = typed_chunk_corpus(15, seed=44)
        dump_chunk_file(tmp_path / "train.txt", tr_s, tr_g, typed=True)
        dump_chunk_file(tmp_path / "gold.txt", te_s, te_g, typed=True)
        assert run_command(
            ["train", "--task", "typed-chunk", "--train", str(tmp_path / "train.txt"),
             "--model", str(tmp_path / "m"), "--workers", "1"]
        ) == 0
        assert run_command(
            ["chunk-typed", "--model", str(tmp_path / "m"),
             "--input", str(tmp_path / "gold.txt"),
             "--output", str(tmp_path / "out.txt"), "--workers", "1"]
        ) == 0
        assert run_command(
            ["evaluate", "--found", str(tmp_path / "out.txt"),
             "--gold", str(tmp_path / "gold.txt"), "--per-type"]
        ) == 0
        assert "NP" in capsys.readouterr().out

    def test_parse_flow(self, tmp_path):
        tr_s, tr_g = parse_corpus(50, seed=45)
        te_s, te_g = parse_corpus(10, seed=46)
        dump_tree_file(tmp_path / "train.txt", tr_s, tr_g)
        dump_tree_file(tmp_path / "gold.txt", te_s, te_g)
        assert run_command(
            ["train", "--task", "full-parse", "--train", str(tmp_path / "train.txt"),
             "--model", str(tmp_path / "m"), "--workers", "1"]
        ) == 0
        assert run_command(
            ["parse", "--model", str(tmp_path / "m"), "--input", str(tmp_path / "gold.txt"),
             "--output", str(tmp_path / "out.txt"), "--workers", "1"]
        ) == 0
        assert run_command(
            ["evaluate", "--found", str(tmp_path / "out.txt"),
             "--gold", str(tmp_path / "gold.txt"), "--column", "tree"]
        ) == 0

    def test_parse_np_flow(self, tmp_path):
        from mbparse.synth import nested_np_corpus

        tr_s, tr_g = nested_np_corpus(50, seed=52)
        te_s, te_g = nested_np_corpus(10, seed=53)
        dump_tree_file(tmp_path / "train.txt", tr_s, tr_g)
        dump_tree_file(tmp_path / "gold.txt", te_s, te_g)
        assert run_command(
            ["train", "--task", "np-parse", "--train", str(tmp_path / "train.txt"),
             "--model", str(tmp_path / "m"), "--workers", "1"]
        ) == 0
        assert run_command(
            ["parse-np", "--model", str(tmp_path / "m"), "--input", str(tmp_path / "gold.txt"),
             "--output", str(tmp_path / "out.txt"), "--workers", "1"]
        ) == 0
        assert run_command(
            ["evaluate", "--found", str(tmp_path / "out.txt"),
             "--gold", str(tmp_path / "gold.txt"), "--column", "tree"]
        ) == 0

    def test_clauses_flow(self, tmp_path):
        tr_s, tr_c, tr_f = clause_corpus(40, seed=47)
        te_s, te_c, te_f = clause_corpus(10, seed=48)

        def dump(path, sents, forests):
            rows = []
            for s, f in zip(sents, forests):
                cells = encode_clause_column(f, len(s))
                rows.append(
                    [(t.word, t.pos, t.chunk_tag, c) for t, c in zip(s, cells)]
                )
            write_corpus(rows, path, columns=("word", "pos", "chunk", "clause"))

        dump(tmp_path / "train.txt", tr_s, tr_f)
        dump(tmp_path / "gold.txt", te_s, te_f)
        assert run_command(
            ["train", "--task", "clauses", "--train", str(tmp_path / "train.txt"),
             "--model", str(tmp_path / "m"), "--workers", "1"]
        ) == 0
        assert run_command(
            ["clauses", "--model", str(tmp_path / "m"), "--input", str(tmp_path / "gold.txt"),
             "--output", str(tmp_path / "out.txt"), "--workers", "1"]
        ) == 0
        assert run_command(
            ["evaluate", "--found", str(tmp_path / "out.txt"),
             "--gold", str(tmp_path / "gold.txt"), "--column", "clause"]
        ) == 0


class TestCombineCommand:
    def test_majority_three_inputs(self, tmp_path, capsys):
        te_s, te_g = np_chunk_corpus(15, seed=49)
        dump_chunk_file(tmp_path / "gold.txt", te_s, te_g)
        # three noisy copies: perturb different sentences in each
        for k in range(3):
            import random

            rng = random.Random(k)
            rows = []
            for si, (s, g) in enumerate(zip(te_s, te_g)):
                tags = encode(g, Scheme.IOB1, len(s), typed=False)
                if si % 3 == k and tags:
                    i = rng.randrange(len(tags))
                    tags[i] = "I" if tags[i] == "O" else "O"
                rows.append([(t.word, t.pos, tag) for t, tag in zip(s, tags)])
            write_corpus(rows, tmp_path / f"sys{k}.txt", columns=("word", "pos", "chunk"))
        assert run_command(
            ["combine", "--method", "majority",
             "--inputs", str(tmp_path / "sys0.txt"), str(tmp_path / "sys1.txt"),
             str(tmp_path / "sys2.txt"), "--output", str(tmp_path / "voted.txt")]
        ) == 0
        run_command(
            ["evaluate", "--found", str(tmp_path / "voted.txt"),
             "--gold", str(tmp_path / "gold.txt")]
        )
        assert "F 100.00" in capsys.readouterr().out  # each error outvoted 2:1


class TestSelectFeaturesCommand:
    def test_runs_and_reports(self, tmp_path, capsys):
        tr_s, tr_g = np_chunk_corpus(30, seed=50)
        dump_chunk_file(tmp_path / "train.txt", tr_s, tr_g)
        assert run_command(
            ["select-features", "--train", str(tmp_path / "train.txt"),
             "--candidates", "p[-1..1]", "--beam", "2", "--folds", "2"]
        ) == 0
        out = capsys.readouterr().out
        assert "best set:" in out and "templates evaluated:" in out


class TestXorCommand:
    def test_table_shape(self, capsys):
        assert run_command(
            ["xor-experiment", "--extra", "0..2", "--runs", "2", "--seed", "5", "--k", "1"]
        ) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "extra\tmean_correct"
        assert len(lines) == 4
        assert lines[1].startswith("0\t400.00")

    def test_comma_list(self, capsys):
        assert run_command(
            ["xor-experiment", "--extra", "0,2", "--runs", "1", "--seed", "5", "--k", "1"]
        ) == 0
        assert len(capsys.readouterr().out.strip().splitlines()) == 3


class TestErrors:
    def test_unknown_config_key_is_strict(self, tmp_path):
        cfg = tmp_path / "bad.ini"
        cfg.write_text("[learner]\nnot_a_key = 1\n")
        with pytest.raises(ConfigError, match="not_a_key"):
            run_command(
                ["xor-experiment", "--extra", "0", "--runs", "1", "--seed", "1",
                 "--config", str(cfg)]
            )

    def test_usage_error_is_config_error(self):
        with pytest.raises(ConfigError):
            run_command(["no-such-command"])

    def test_main_exit_codes(self, tmp_path, monkeypatch, capsys):
        import sys

        monkeypatch.setattr(sys, "argv", ["mbparse", "no-such-command"])
        with pytest.raises(SystemExit) as exit1:
            main()
        assert exit1.value.code == 1

        monkeypatch.setattr(
            sys,
            "argv",
            ["mbparse", "evaluate", "--found", str(tmp_path / "missing.txt"),
             "--gold", str(tmp_path / "missing.txt")],
        )
        with pytest.raises(SystemExit) as exit2:
            main()
        assert exit2.value.code == 2

    def test_ragged_corpus_gives_io_exit(self, tmp_path, monkeypatch):
        import sys

        bad = tmp_path / "bad.txt"
        bad.write_text("a\tB\tO\nb\tC\n")
        monkeypatch.setattr(
            sys, "argv",
            ["mbparse", "evaluate", "--found", str(bad), "--gold", str(bad)],
        )
        with pytest.raises(SystemExit) as err:
            main()
        assert err.value.code == 2
