import subprocess
import sys

import pytest

from tagboot.cli import main


def _make_project(root, verses=80, seed=5, iterations=3, **extra):
    args = ["synth", "--project", str(root), "--verses", str(verses), "--seed", str(seed),
            "--iterations", str(iterations)]
    for key, value in extra.items():
        args.extend([f"--{key.replace('_', '-')}", str(value)])
    assert main(args) == 0
    assert main(["preprocess", "--project", str(root)]) == 0
    assert main(["project", "--project", str(root)]) == 0


class TestExitCodes:
    def test_unknown_subcommand_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc_info:
            main(["frobnicate"])
        assert exc_info.value.code == 1

    def test_missing_required_flag_is_usage_error(self):
        with pytest.raises(SystemExit) as exc_info:
            main(["preprocess"])
        assert exc_info.value.code == 1

    def test_data_error_is_exit_2(self, tmp_path, capsys):
        (tmp_path / "project.cfg").write_text("", encoding="utf-8")
        rc = main(["preprocess", "--project", str(tmp_path)])
        assert rc == 2
        assert "missing file" in capsys.readouterr().err

    def test_project_without_alignments_names_missing_file(self, tmp_path, capsys):
        root = tmp_path / "p"
        assert main(["synth", "--project", str(root), "--verses", "10"]) == 0
        assert main(["preprocess", "--project", str(root)]) == 0
        (root / "alignments.txt").unlink()
        rc = main(["project", "--project", str(root)])
        assert rc == 2
        assert "alignments.txt" in capsys.readouterr().err

    def test_unknown_config_key_rejected(self, tmp_path, capsys):
        (tmp_path / "project.cfg").write_text("bogus_key=1\n", encoding="utf-8")
        rc = main(["preprocess", "--project", str(tmp_path)])
        assert rc == 2
        assert "bogus_key" in capsys.readouterr().err

    def test_help_exits_zero(self):
        for sub in ("preprocess", "align", "project", "train", "apply",
                    "bootstrap", "eval", "synth", "serve"):
            with pytest.raises(SystemExit) as exc_info:
                main([sub, "--help"])
            assert exc_info.value.code == 0


class TestPipeline:
    def test_synth_preprocess_project(self, tmp_path, capsys):
        root = tmp_path / "proj"
        _make_project(root, verses=50)
        assert (root / "snapshots" / "IgbTC-0.cols").is_file()
        assert (root / "work" / "projection-stats.txt").is_file()

    def test_align_train_ibm1_and_import(self, tmp_path):
        root = tmp_path / "proj"
        _make_project(root, verses=40)
        assert main(["align", "--project", str(root)]) == 0
        trained = (root / "work" / "alignments.txt").read_text(encoding="utf-8")
        assert (root / "work" / "ttable.tsv").is_file()
        assert main(["align", "--project", str(root), "--import", str(root / "alignments.txt")]) == 0
        imported = (root / "work" / "alignments.txt").read_text(encoding="utf-8")
        assert imported == (root / "alignments.txt").read_text(encoding="utf-8")
        assert trained.count("\n") == imported.count("\n")

    def test_train_apply_round(self, tmp_path, capsys):
        root = tmp_path / "proj"
        _make_project(root, verses=60)
        assert main(["bootstrap", "--project", str(root), "--iterations", "2",
                     "--increment", "0.3"]) == 0
        # standalone train on the persisted slice, then apply reproduces a snapshot
        from tagboot.bootstrap import ProjectStore
        from tagboot.corpus import parse_vertical, serialize_vertical
        from tagboot.bootstrap import make_training_corpus

        store = ProjectStore(root)
        gold = parse_vertical((root / "gold.cols").read_text(encoding="utf-8"), 1)
        initial0 = store.read_snapshot(0)
        ids = set(store.read_gold_ids(2))
        training = make_training_corpus(gold, initial0, ids)
        training_path = tmp_path / "training.cols"
        training_path.write_text(serialize_vertical(training), encoding="utf-8")
        rules_path = tmp_path / "trained.rules"
        assert main(["train", "--project", str(root), "--input", str(training_path),
                     "--rules", str(rules_path)]) == 0
        out_path = tmp_path / "reapplied.cols"
        assert main(["apply", "--rules", str(rules_path),
                     "--input", str(store.snapshot_path(0)), "--output", str(out_path)]) == 0
        assert out_path.read_text(encoding="utf-8") == store.snapshot_path(2).read_text(encoding="utf-8")

    def test_eval_prints_metrics_row(self, tmp_path, capsys):
        root = tmp_path / "proj"
        _make_project(root, verses=30)
        assert main(["bootstrap", "--project", str(root), "--iterations", "1",
                     "--increment", "0.5"]) == 0
        capsys.readouterr()
        rc = main(["eval", "--project", str(root),
                   "--pred", str(root / "snapshots" / "IgbTC-1.cols"),
                   "--gold", str(root / "gold.cols"), "--label", "IgbTC-1"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "IgbTC-1" in out and "%" in out

    def test_eval_confusion_flag(self, tmp_path, capsys):
        root = tmp_path / "proj"
        _make_project(root, verses=20)
        capsys.readouterr()
        rc = main(["eval", "--project", str(root),
                   "--pred", str(root / "snapshots" / "IgbTC-0.cols"),
                   "--gold", str(root / "gold.cols"), "--confusion"])
        assert rc == 0
        out = capsys.readouterr().out
        rows = [line for line in out.split("\n") if line.count("\t") == 2]
        assert rows, out
        from tagboot.corpus import parse_vertical

        gold = parse_vertical((root / "gold.cols").read_text(encoding="utf-8"), 1)
        assert sum(int(r.split("\t")[2]) for r in rows) == gold.token_count()

    def test_eval_requires_tagset(self, tmp_path, capsys):
        root = tmp_path / "proj"
        _make_project(root, verses=20)
        rc = main(["eval", "--pred", str(root / "gold.cols"), "--gold", str(root / "gold.cols")])
        assert rc == 2

    def test_bootstrap_holdout_flag(self, tmp_path, capsys):
        root = tmp_path / "proj"
        _make_project(root, verses=40)
        rc = main(["bootstrap", "--project", str(root), "--iterations", "2",
                   "--increment", "0.2", "--holdout"])
        assert rc == 0
        assert "holdout" in capsys.readouterr().out


class TestDeterminism:
    def test_bootstrap_twice_identical_outputs(self, tmp_path):
        outputs = []
        for name in ("a", "b"):
            root = tmp_path / name
            _make_project(root, verses=60, seed=11, iterations=2)
            assert main(["bootstrap", "--project", str(root), "--iterations", "2",
                         "--increment", "0.25", "--seed", "11"]) == 0
            outputs.append({
                "metrics": (root / "metrics.csv").read_bytes(),
                "snap1": (root / "snapshots" / "IgbTC-1.cols").read_bytes(),
                "snap2": (root / "snapshots" / "IgbTC-2.cols").read_bytes(),
                "rules1": (root / "rules" / "iter-1.rules").read_bytes(),
                "rules2": (root / "rules" / "iter-2.rules").read_bytes(),
            })
        assert outputs[0] == outputs[1]

    def test_rerun_in_place_idempotent(self, tmp_path):
        root = tmp_path / "proj"
        _make_project(root, verses=40, seed=2, iterations=2)
        assert main(["bootstrap", "--project", str(root), "--iterations", "2",
                     "--increment", "0.25"]) == 0
        first = (root / "metrics.csv").read_bytes()
        assert main(["bootstrap", "--project", str(root), "--iterations", "2",
                     "--increment", "0.25"]) == 0
        assert (root / "metrics.csv").read_bytes() == first


class TestSubprocessEntryPoint:
    def test_module_invocation(self, tmp_path):
        root = tmp_path / "proj"
        result = subprocess.run(
            [sys.executable, "-m", "tagboot", "synth", "--project", str(root),
             "--verses", "10"],
            capture_output=True, text=True,
        )
        assert result.returncode == 0, result.stderr
        assert (root / "project.cfg").is_file()

    def test_usage_error_exit_code(self):
        result = subprocess.run(
            [sys.executable, "-m", "tagboot", "nonsense"],
            capture_output=True, text=True,
        )
        assert result.returncode == 1
