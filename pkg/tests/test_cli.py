import json

import pytest

from restyle.cli import main
from restyle.data import SymbSpec, generate_symb, load_dataset, save_records
from restyle.pipeline import read_manifest

MOCK_ENV = {
    "RESTYLE_COMPLETE_URL": "mock://lexicon-flip",
    "RESTYLE_SCORE_URL": "mock://uniform",
    "RESTYLE_FILL_MASK_URL": "mock://sentiment",
    "RESTYLE_EMBED_URL": "mock://hash-embed",
}


@pytest.fixture
def mock_env(monkeypatch):
    for key in list(MOCK_ENV) + ["RESTYLE_CLASSIFIER_URL"]:
        monkeypatch.delenv(key, raising=False)
    for key, value in MOCK_ENV.items():
        monkeypatch.setenv(key, value)


@pytest.fixture
def dataset_path(tmp_path, sentiment_records):
    path = tmp_path / "toy.jsonl"
    save_records(sentiment_records, str(path), "jsonl")
    return str(path)


class TestTransfer:
    def test_single_text_prints_flip(self, mock_env, capsys):
        code = main(["transfer", "--text", "good food", "--from", "positive",
                     "--to", "negative", "--template", "contrastive",
                     "--delimiter", "curly"])
        assert code == 0
        assert capsys.readouterr().out.strip() == "bad food"

    def test_json_record(self, mock_env, capsys):
        code = main(["transfer", "--text", "good food", "--from", "positive",
                     "--to", "negative", "--json"])
        assert code == 0
        record = json.loads(capsys.readouterr().out)
        assert record["winner"] == "bad food"
        assert len(record["candidates"]) == 3

    def test_missing_to_exits_2(self, mock_env):
        with pytest.raises(SystemExit) as exc:
            main(["transfer", "--text", "x", "--from", "positive"])
        assert exc.value.code == 2

    def test_k_zero_exits_2(self, mock_env):
        with pytest.raises(SystemExit) as exc:
            main(["transfer", "--text", "x", "--from", "a", "--to", "b",
                  "--k", "0"])
        assert exc.value.code == 2

    def test_missing_endpoints_exit_2(self, monkeypatch, capsys):
        for key in MOCK_ENV:
            monkeypatch.delenv(key, raising=False)
        code = main(["transfer", "--text", "x", "--from", "a", "--to", "b"])
        assert code == 2
        assert "missing backend endpoints" in capsys.readouterr().err

    def test_backend_failure_exits_1(self, mock_env, monkeypatch, capsys):
        monkeypatch.setenv("RESTYLE_COMPLETE_URL", "http://127.0.0.1:9/complete")
        monkeypatch.setenv("RESTYLE_TIMEOUT", "0.2")
        monkeypatch.setenv("RESTYLE_MAX_RETRIES", "1")
        code = main(["transfer", "--text", "good food", "--from", "positive",
                     "--to", "negative"])
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_unknown_template_exits_2(self, mock_env, capsys):
        code = main(["transfer", "--text", "x", "--from", "a", "--to", "b",
                     "--template", "psychedelic"])
        assert code == 2

    def test_dataset_run_writes_manifest(self, mock_env, dataset_path,
                                         tmp_path, capsys):
        out = tmp_path / "run.jsonl"
        code = main(["transfer", "--dataset", dataset_path, "--from", "positive",
                     "--to", "negative", "--seed", "3", "--out", str(out),
                     "--json"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["examples"] == 2  # only the positive->negative rows
        assert payload["summary"]["accuracy"] == 1.0
        manifest = read_manifest(str(out))
        assert len(manifest.records) == 2

    def test_deterministic_output(self, mock_env, capsys):
        argv = ["transfer", "--text", "great fresh bread", "--from", "positive",
                "--to", "negative", "--seed", "11", "--json"]
        main(argv)
        first = capsys.readouterr().out
        main(argv)
        assert capsys.readouterr().out == first


class TestSweep:
    def test_restricted_sweep_csv(self, mock_env, dataset_path, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        code = main(["sweep", "--dataset", dataset_path,
                     "--templates", "vanilla,contrastive",
                     "--delimiters", "curly", "--seed", "0",
                     "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "template,delimiter,direction,shots,accuracy,r_sbleu,s_sbleu,ppl"
        assert len(lines) == 1 + 2 * 1 * 2

    def test_sweep_stdout_deterministic(self, mock_env, dataset_path, capsys):
        argv = ["sweep", "--dataset", dataset_path, "--templates", "contrastive",
                "--delimiters", "curly,square", "--seed", "4"]
        main(argv)
        first = capsys.readouterr().out
        main(argv)
        assert capsys.readouterr().out == first

    def test_bad_direction_syntax_exits_2(self, mock_env, dataset_path):
        code = main(["sweep", "--dataset", dataset_path,
                     "--directions", "positive-negative"])
        assert code == 2


class TestSymb:
    def test_generates_requested_count(self, tmp_path, capsys):
        out = tmp_path / "symb.jsonl"
        code = main(["symb", "--n", "40", "--seed", "7", "--out", str(out)])
        assert code == 0
        records = load_dataset(str(out), "jsonl")
        assert len(records) == 40
        assert records == generate_symb(SymbSpec(n=40, seed=7))

    def test_tsv_output(self, tmp_path):
        out = tmp_path / "symb.tsv"
        assert main(["symb", "--n", "5", "--seed", "1", "--out", str(out),
                     "--format", "tsv"]) == 0
        assert len(load_dataset(str(out), "tsv")) == 5


class TestClean:
    def test_cleans_lines(self, tmp_path, capsys):
        src = tmp_path / "raw.txt"
        dst = tmp_path / "clean.txt"
        src.write_text("this place was great !\ndo n't go\n")
        code = main(["clean", "--in", str(src), "--out", str(dst)])
        assert code == 0
        assert dst.read_text() == "this place was great!\ndon't go\n"


class TestEval:
    def test_identical_files_bleu_100(self, tmp_path, capsys, monkeypatch):
        monkeypatch.delenv("RESTYLE_SCORE_URL", raising=False)
        hyp = tmp_path / "h.txt"
        ref = tmp_path / "r.txt"
        hyp.write_text("good food\nnice day\n")
        ref.write_text("good food\nnice day\n")
        code = main(["eval", "--hyp", str(hyp), "--ref", str(ref), "--json"])
        assert code == 0
        summary = json.loads(capsys.readouterr().out)["summary"]
        assert summary["r_sbleu"] == 100.0
        assert summary["exact_match"] == 1.0

    def test_gleu_needs_all_three(self, tmp_path, capsys, monkeypatch):
        monkeypatch.delenv("RESTYLE_SCORE_URL", raising=False)
        for name, body in (("s", "the cat sit\n"), ("h", "the cat sat\n"),
                           ("r", "the cat sat\n")):
            (tmp_path / f"{name}.txt").write_text(body)
        code = main(["eval", "--hyp", str(tmp_path / "h.txt"),
                     "--src", str(tmp_path / "s.txt"),
                     "--ref", str(tmp_path / "r.txt"), "--json"])
        assert code == 0
        summary = json.loads(capsys.readouterr().out)["summary"]
        assert summary["gleu"] == pytest.approx(1.0)
        assert summary["s_sbleu"] is not None

    def test_line_count_mismatch_exits_2(self, tmp_path, capsys):
        (tmp_path / "h.txt").write_text("a\nb\n")
        (tmp_path / "r.txt").write_text("a\n")
        code = main(["eval", "--hyp", str(tmp_path / "h.txt"),
                     "--ref", str(tmp_path / "r.txt")])
        assert code == 2

    def test_manifest_summary_reproduced_exactly(self, mock_env, dataset_path,
                                                 tmp_path, capsys):
        out = tmp_path / "run.jsonl"
        main(["transfer", "--dataset", dataset_path, "--from", "positive",
              "--to", "negative", "--seed", "3", "--out", str(out)])
        capsys.readouterr()
        code = main(["eval", "--manifest", str(out), "--json"])
        assert code == 0
        recomputed = json.loads(capsys.readouterr().out)["summary"]
        stored = read_manifest(str(out)).summary.to_dict()
        assert recomputed == stored

    def test_needs_some_input(self, capsys):
        assert main(["eval"]) == 2


class TestCopyBaselineCommand:
    def test_reports_s_sbleu_100(self, mock_env, dataset_path, capsys):
        code = main(["copy-baseline", "--dataset", dataset_path, "--json"])
        assert code == 0
        summary = json.loads(capsys.readouterr().out)["summary"]
        assert summary["s_sbleu"] == 100.0
        assert summary["accuracy"] == 0.0
