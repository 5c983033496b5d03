import json
from pathlib import Path

import pytest

from termforge.cli import load_config_file, main, resolve_config
from termforge.corpus import parse_conll

GOLDEN = Path(__file__).resolve().parent / "fixtures" / "cli_e2e_golden.json"


@pytest.fixture(scope="session")
def vocab_path(fixtures_dir):
    return str(fixtures_dir / "bert-base-uncased-vocab.txt")


@pytest.fixture(scope="session")
def vectors_path(corpus_dir):
    return str(corpus_dir / "vectors_32d.vec")


class TestConfigResolution:
    def test_flat_file_parsed(self, tmp_path):
        path = tmp_path / "tf.conf"
        path.write_text(
            "# settings\n"
            "t_topic = 0.2\n"
            't_sp = "0.07"\n'
            "specificity-mode = distance  # dashes allowed\n"
        )
        values = load_config_file(path)
        assert values == {"t_topic": "0.2", "t_sp": "0.07", "specificity_mode": "distance"}

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "tf.conf"
        path.write_text("nope = 1\n")
        with pytest.raises(ValueError, match="unknown setting"):
            load_config_file(path)

    def test_precedence_cli_env_file_default(self, tmp_path, monkeypatch):
        import argparse

        path = tmp_path / "tf.conf"
        path.write_text("t_topic = 0.3\nt_sp = 0.2\nt_morph = 7\n")
        monkeypatch.setenv("TERMFORGE_T_SP", "0.4")
        monkeypatch.setenv("TERMFORGE_T_TOPIC", "0.5")
        args = argparse.Namespace(config=str(path), t_topic=0.9)
        config = resolve_config(args)
        assert config.t_topic == 0.9       # CLI beats env and file
        assert config.t_sp == 0.4          # env beats file
        assert config.t_morph == 7         # file beats default
        assert config.specificity_mode == "similarity"  # default

    def test_defaults_without_sources(self):
        import argparse

        config = resolve_config(argparse.Namespace())
        assert (config.t_topic, config.t_sp, config.t_morph) == (0.1, 0.05, 4)


class TestWiring:
    def test_annotate_produces_audit_and_iob(self, tmp_path, corpus_dir, vocab_path, vectors_path, capsys):
        out = tmp_path / "spans.jsonl"
        rc = main([
            "annotate",
            "--in", str(corpus_dir / "tiny_annotate.conll"),
            "--vectors", vectors_path,
            "--subword-vocab", vocab_path,
            "--out", str(out),
        ])
        assert rc == 0
        audits = [json.loads(line) for line in out.read_text().splitlines()]
        assert audits and {"sentence", "start", "end", "text", "decision", "source"} <= set(audits[0])
        labeled = parse_conll(tmp_path / "spans.conll", strict_iob=True)
        assert labeled.labeled and len(labeled.sentences) == 12
        header = capsys.readouterr().err
        assert "termforge" in header and "seed=" in header and "config=" in header

    def test_eval_reports_both_blocks(self, tmp_path, capsys):
        pred = tmp_path / "pred.conll"
        gold = tmp_path / "gold.conll"
        pred.write_text("a NOUN a B\nb NOUN b I\n\n")
        gold.write_text("a NOUN a B\nb NOUN b O\n\n")
        out = tmp_path / "report.json"
        rc = main(["eval", "--pred", str(pred), "--gold", str(gold), "--out", str(out)])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert "exact" in doc and "partial" in doc
        assert doc["partial"]["f1"] == 1.0 and doc["exact"]["f1"] == 0.0
        assert "precision" in capsys.readouterr().out

    def test_train_and_tag_pos(self, tmp_path, corpus_dir):
        model = tmp_path / "pos.json"
        rc = main(["train-pos", "--in", str(corpus_dir / "pos_train_1k.conll"),
                   "--out", str(model), "--epochs", "2"])
        assert rc == 0
        raw = tmp_path / "raw.txt"
        raw.write_text("The clinical cytokine infusion reduces each dosage.\n")
        out = tmp_path / "tagged.conll"
        rc = main(["tag-pos", "--in", str(raw), "--format", "text",
                   "--model", str(model), "--out", str(out)])
        assert rc == 0
        parsed = parse_conll(out)
        assert parsed.sentences[0].tokens[1].pos == "ADJ"

    def test_annotate_untagged_input_requires_pos_model(self, tmp_path, vocab_path, vectors_path, capsys):
        src = tmp_path / "raw.conll"
        src.write_text("Our\ncosmic\ntelescope\nimproves\n\n")
        rc = main(["annotate", "--in", str(src), "--vectors", vectors_path,
                   "--subword-vocab", vocab_path, "--out", str(tmp_path / "a.jsonl")])
        assert rc == 1
        assert "--pos-model" in capsys.readouterr().err

    def test_annotate_untagged_input_with_pos_model(self, tmp_path, corpus_dir, vocab_path, vectors_path):
        pos_model = tmp_path / "pos.json"
        main(["train-pos", "--in", str(corpus_dir / "pos_train_1k.conll"),
              "--out", str(pos_model), "--epochs", "2"])
        src = tmp_path / "raw.conll"
        src.write_text("Our\ncosmic\ntelescope\nimproves\nthe\nluminosity\n\n")
        out = tmp_path / "a.jsonl"
        rc = main(["annotate", "--in", str(src), "--vectors", vectors_path,
                   "--subword-vocab", vocab_path, "--pos-model", str(pos_model),
                   "--out", str(out)])
        assert rc == 0
        labeled = parse_conll(tmp_path / "a.conll", strict_iob=True)
        assert labeled.sentences[0].tokens[2].pos == "NOUN"
        assert labeled.gold_spans[0]  # "cosmic telescope" survives as a chunk

    def test_eval_per_sentence_flag(self, tmp_path):
        pred = tmp_path / "pred.conll"
        gold = tmp_path / "gold.conll"
        pred.write_text("a NOUN a B\n\nb NOUN b O\n\n")
        gold.write_text("a NOUN a B\n\nb NOUN b B\n\n")
        out = tmp_path / "report.json"
        rc = main(["eval", "--pred", str(pred), "--gold", str(gold),
                   "--out", str(out), "--per-sentence"])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert len(doc["per_sentence"]) == 2

    def test_missing_input_fails_cleanly(self, tmp_path, capsys):
        rc = main(["eval", "--pred", str(tmp_path / "nope.conll"),
                   "--gold", str(tmp_path / "nope.conll")])
        assert rc == 1
        assert "error:" in capsys.readouterr().err

    def test_unknown_flag_exits_with_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["eval", "--bogus"])
        assert exc.value.code == 2

    def test_bench_requires_model_for_student(self):
        with pytest.raises(SystemExit):
            main(["bench", "--system", "student", "--in", "x.conll"])


class TestEndToEnd:
    def test_generate_train_tag_eval_matches_golden(self, tmp_path, corpus_dir, vocab_path, vectors_path):
        golden = json.loads(GOLDEN.read_text())
        weak = tmp_path / "weak.conll"
        rc = main([
            "generate", "--seed", "13",
            "--in", str(corpus_dir / "bench_500.conll"),
            "--vectors", vectors_path,
            "--subword-vocab", vocab_path,
            "--out", str(weak),
            "--report", str(tmp_path / "gen_report.json"),
            "--sample-size", "150",
        ])
        assert rc == 0

        model = tmp_path / "student.json"
        rc = main([
            "train-tagger", "--seed", "13",
            "--in", str(weak),
            "--subword-vocab", vocab_path,
            "--out", str(model),
            "--epochs", "3",
        ])
        assert rc == 0

        pred = tmp_path / "pred.conll"
        rc = main(["tag", "--in", str(weak), "--model", str(model), "--out", str(pred)])
        assert rc == 0

        report_path = tmp_path / "eval.json"
        rc = main(["eval", "--pred", str(pred), "--gold", str(weak), "--out", str(report_path)])
        assert rc == 0
        report = json.loads(report_path.read_text())
        assert report["counts"] == golden["counts"]
        assert report["exact"]["f1"] == pytest.approx(golden["exact_f1"], abs=1e-12)
        assert report["partial"]["f1"] == pytest.approx(golden["partial_f1"], abs=1e-12)

    def test_bench_subcommand_writes_report(self, tmp_path, corpus_dir, vocab_path, vectors_path):
        weak = tmp_path / "weak.conll"
        main([
            "generate", "--seed", "1",
            "--in", str(corpus_dir / "tiny_annotate.conll"),
            "--vectors", vectors_path,
            "--subword-vocab", vocab_path,
            "--out", str(weak),
        ])
        model = tmp_path / "student.json"
        main(["train-tagger", "--seed", "1", "--in", str(weak),
              "--subword-vocab", vocab_path, "--out", str(model), "--epochs", "1",
              "--holdout", "0.0"])
        out = tmp_path / "bench.json"
        rc = main([
            "bench", "--system", "student",
            "--in", str(weak),
            "--model", str(model),
            "--warmup", "2", "--repetitions", "1", "--measure-n", "5",
            "--out", str(out), "--csv", str(tmp_path / "raw.csv"),
        ])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["mean_ms"] > 0 and doc["n_sentences"] == 5
        assert (tmp_path / "raw.csv").read_text().startswith("call_index")
