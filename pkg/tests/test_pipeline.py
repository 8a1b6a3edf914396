import json

import pytest

from restyle.data import StylePairRecord
from restyle.metrics import EvalSummary
from restyle.mocks import mock_endpoints
from restyle.pipeline import (
    PipelineError,
    RequestTemplate,
    SweepGrid,
    copy_baseline,
    directions_in,
    read_manifest,
    run_sweep,
    transfer_corpus,
    transfer_one,
    write_manifest,
)
from restyle.prompts import (
    DELIMITERS,
    StyleLabel,
    TemplateKind,
    TransferRequest,
    builtin_delimiters,
)
from restyle.reranking import RerankConfig

POS = StyleLabel("positive")
NEG = StyleLabel("negative")


def request(text="the food was good"):
    return TransferRequest(input_text=text, source_style=POS, target_style=NEG)


def record(rid, text, src=POS, dst=NEG, reference=None):
    return StylePairRecord(id=rid, source=text, reference=reference,
                           source_style=src, target_style=dst)


class TestTransferOne:
    def test_flip_mock_winner_is_flipped(self, mock_ep):
        cfg = RerankConfig(k=3, endpoints=mock_ep)
        winner, rec = transfer_one(request(), cfg, example_id="x")
        assert winner.text == "the food was bad"
        assert rec["winner"] == "the food was bad"
        assert len(rec["raw_candidates"]) == 3
        assert rec["prompt"].endswith("{")

    def test_echo_mock_copies_input(self):
        ep = mock_endpoints(complete="mock://echo")
        cfg = RerankConfig(k=3, endpoints=ep)
        winner, _ = transfer_one(request(), cfg)
        assert winner.text == "the food was good"

    def test_k1_rerank_and_baseline_agree(self, mock_ep):
        cfg = RerankConfig(k=1, endpoints=mock_ep)
        winner, rec = transfer_one(request(), cfg)
        assert rec["winner_index"] == rec["baseline_index"]
        assert len(rec["candidates"]) == 1
        assert winner.text == "the food was bad"

    def test_empty_extraction_pool_errors(self):
        ep = mock_endpoints(complete="mock://echo?text=}")
        cfg = RerankConfig(k=2, endpoints=ep)
        with pytest.raises(PipelineError, match="empty extraction pool"):
            transfer_one(request(), cfg, example_id="bad")

    def test_argmax_dominance_over_baseline(self, mock_ep):
        cfg = RerankConfig(k=3, endpoints=mock_ep)
        _, rec = transfer_one(request("great service and fresh bread"), cfg)
        composites = [s["composite"] for s in rec["scores"]]
        indexes = [c["index"] for c in rec["candidates"]]
        winner_composite = composites[indexes.index(rec["winner_index"])]
        baseline_composite = composites[indexes.index(rec["baseline_index"])]
        assert winner_composite >= baseline_composite


class TestTransferCorpus:
    def test_four_record_manifest(self, mock_ep, sentiment_records):
        cfg = RerankConfig(k=3, endpoints=mock_ep)
        manifest = transfer_corpus(sentiment_records, RequestTemplate(), cfg,
                                   seed=0)
        assert len(manifest.records) == 4
        assert manifest.summary.s_sbleu is not None
        assert manifest.summary.accuracy == 1.0
        assert manifest.summary.ppl == pytest.approx(50257, rel=1e-9)
        assert manifest.summary.r_sbleu is None  # no references anywhere
        assert [r["id"] for r in manifest.records] == ["p0", "p1", "n0", "n1"]

    def test_references_enable_r_sbleu(self, mock_ep):
        records = [record("a", "the food was good", reference="the food was bad")]
        cfg = RerankConfig(k=3, endpoints=mock_ep)
        manifest = transfer_corpus(records, RequestTemplate(), cfg)
        assert manifest.summary.r_sbleu == 100.0

    def test_partial_failure_keeps_running(self, mock_ep, sentiment_records):
        poisoned = sentiment_records + [record("bad", "braces } inside")]
        cfg = RerankConfig(k=3, endpoints=mock_ep)
        manifest = transfer_corpus(poisoned, RequestTemplate(), cfg)
        errors = [r for r in manifest.records if "error" in r]
        assert len(errors) == 1
        assert errors[0]["id"] == "bad"
        assert "DelimiterCollisionError" in errors[0]["error"]
        assert len(manifest.successful_records()) == 4

    def test_all_failed_raises(self, mock_ep):
        cfg = RerankConfig(k=3, endpoints=mock_ep)
        with pytest.raises(PipelineError, match="all 1 examples failed"):
            transfer_corpus([record("bad", "oops } text")],
                            RequestTemplate(), cfg)

    def test_empty_corpus_rejected(self, mock_ep):
        with pytest.raises(PipelineError):
            transfer_corpus([], RequestTemplate(),
                            RerankConfig(endpoints=mock_ep))

    def test_bit_reproducible_modulo_timestamp(self, mock_ep, sentiment_records):
        cfg = RerankConfig(k=3, endpoints=mock_ep)
        first = transfer_corpus(sentiment_records, RequestTemplate(), cfg,
                                seed=42, jobs=3)
        second = transfer_corpus(sentiment_records, RequestTemplate(), cfg,
                                 seed=42, jobs=3)
        assert first.run_id == second.run_id
        assert first.config == second.config
        assert first.records == second.records
        assert first.summary == second.summary

    def test_jobs_do_not_change_order(self, mock_ep, sentiment_records):
        cfg = RerankConfig(k=3, endpoints=mock_ep)
        serial = transfer_corpus(sentiment_records, RequestTemplate(), cfg,
                                 seed=1, jobs=1)
        threaded = transfer_corpus(sentiment_records, RequestTemplate(), cfg,
                                   seed=1, jobs=4)
        assert serial.records == threaded.records

    def test_manifest_round_trip(self, tmp_path, mock_ep, sentiment_records):
        cfg = RerankConfig(k=3, endpoints=mock_ep)
        manifest = transfer_corpus(sentiment_records, RequestTemplate(), cfg,
                                   seed=5)
        path = tmp_path / "run.jsonl"
        write_manifest(manifest, str(path))
        loaded = read_manifest(str(path))
        assert loaded.run_id == manifest.run_id
        assert loaded.records == manifest.records
        assert loaded.summary == manifest.summary
        # one header object plus one record per example
        lines = path.read_text().strip().split("\n")
        assert len(lines) == 1 + len(sentiment_records)
        assert "config" in json.loads(lines[0])


class TestSweep:
    def test_restricted_grid_rows(self, mock_ep, sentiment_records):
        grid = SweepGrid(
            templates=(TemplateKind.VANILLA, TemplateKind.CONTRASTIVE),
            delimiters=(DELIMITERS["curly"],),
            directions=directions_in(sentiment_records),
            shots=(0,))
        cfg = RerankConfig(k=3, endpoints=mock_ep)
        result = run_sweep(sentiment_records, grid, cfg, seed=0)
        assert len(result.rows) == 4  # 2 templates x 1 delimiter x 2 directions
        assert {row["template"] for row in result.rows} == \
            {"vanilla", "contrastive"}
        assert all(row["shots"] == 0 for row in result.rows)
        assert all("error" not in row for row in result.rows)

    def test_full_grid_cardinality(self, mock_ep, sentiment_records):
        grid = SweepGrid(directions=directions_in(sentiment_records))
        cfg = RerankConfig(k=3, endpoints=mock_ep)
        result = run_sweep(sentiment_records, grid, cfg, seed=0)
        assert len(result.rows) == 4 * 10 * 2
        assert len(result.manifests) == 80

    def test_csv_deterministic(self, mock_ep, sentiment_records):
        grid = SweepGrid(templates=(TemplateKind.CONTRASTIVE,),
                         delimiters=tuple(builtin_delimiters()[:3]),
                         directions=directions_in(sentiment_records))
        cfg = RerankConfig(k=3, endpoints=mock_ep)
        first = run_sweep(sentiment_records, grid, cfg, seed=9).to_csv()
        second = run_sweep(sentiment_records, grid, cfg, seed=9).to_csv()
        assert first == second
        header = first.splitlines()[0]
        assert header == "template,delimiter,direction,shots,accuracy,r_sbleu,s_sbleu,ppl"

    def test_cell_failures_isolated(self, mock_ep):
        # one direction has records, the other none: its cells fail alone
        records = [record("a", "good food"), record("b", "fresh bread")]
        grid = SweepGrid(templates=(TemplateKind.CONTRASTIVE,),
                         delimiters=(DELIMITERS["curly"],),
                         directions=(("positive", "negative"),
                                     ("negative", "positive")),
                         shots=(0,))
        cfg = RerankConfig(k=3, endpoints=mock_ep)
        result = run_sweep(records, grid, cfg)
        assert len(result.rows) == 2
        good, bad = result.rows
        assert "error" not in good
        assert "error" in bad
        assert bad["accuracy"] is None if "accuracy" in bad else True

    def test_few_shot_cells_need_exemplars(self, mock_ep, sentiment_records):
        grid = SweepGrid(templates=(TemplateKind.CONTRASTIVE,),
                         delimiters=(DELIMITERS["curly"],),
                         directions=(("positive", "negative"),),
                         shots=(4,))
        cfg = RerankConfig(k=3, endpoints=mock_ep)
        result = run_sweep(sentiment_records, grid, cfg)
        assert "error" in result.rows[0]

    def test_empty_grid_axis_rejected(self):
        with pytest.raises(ValueError):
            SweepGrid(templates=(), directions=(("a", "b"),))


class TestCopyBaseline:
    def test_self_bleu_is_100(self, sentiment_records):
        summary = copy_baseline(sentiment_records)
        assert summary.s_sbleu == 100.0
        assert summary.accuracy is None

    def test_perfect_triple_gleu(self):
        records = [record("a", "the cat sat", reference="the cat sat")]
        summary = copy_baseline(records)
        assert summary.gleu == pytest.approx(1.0)
        assert summary.exact_match == 1.0
        assert summary.r_sbleu == 100.0

    def test_classifier_accuracy_when_endpoints_given(self, mock_ep,
                                                      sentiment_records):
        summary = copy_baseline(sentiment_records, mock_ep)
        # copies keep their source style, so accuracy toward the target is 0
        assert summary.accuracy == 0.0

    def test_empty_rejected(self):
        with pytest.raises(PipelineError):
            copy_baseline([])


def test_summary_is_eval_summary(mock_ep, sentiment_records):
    cfg = RerankConfig(k=3, endpoints=mock_ep)
    manifest = transfer_corpus(sentiment_records, RequestTemplate(), cfg)
    assert isinstance(manifest.summary, EvalSummary)
