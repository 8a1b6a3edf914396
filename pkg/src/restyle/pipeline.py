"""End-to-end orchestration: render, generate, extract, rerank, evaluate.

A corpus run produces a :class:`RunManifest` holding the full audit trail
(prompts, raw model output, extracted candidates, per-candidate scores,
winner and baseline picks) plus the aggregate evaluation summary. Manifests
persist as JSONL: one header object, then one record per example. With
deterministic backends and a fixed seed a run is bit-reproducible apart from
the timestamp.

The prompt-design sweep runs one corpus transfer per grid cell (template x
delimiter x direction x shots) and emits a CSV table of the cell summaries.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone

from . import backends, metrics
from .backends import BackendError, CompletionRequest, DecodeConfig
from .data import StylePairRecord
from .metrics import EvalSummary, SWEEP_CSV_COLUMNS
from .prompts import (
    DelimiterPair,
    Exemplar,
    TemplateKind,
    TransferRequest,
    delimiter_name,
    extract_completion,
    render_prompt,
)
from .reranking import (
    Candidate,
    RerankConfig,
    rerank,
    score_record,
    top_beam_baseline,
)

logger = logging.getLogger(__name__)

DEFAULT_JOBS = 4


class PipelineError(RuntimeError):
    """Run-level failure: empty inputs, empty pools, or every example failing."""


def template_name(template: TemplateKind | str) -> str:
    return template.value if isinstance(template, TemplateKind) else "custom"


@dataclass(frozen=True)
class RequestTemplate:
    """The per-run prompt choices applied to every dataset record."""

    template: TemplateKind | str = TemplateKind.CONTRASTIVE
    delimiter: DelimiterPair = None  # type: ignore[assignment]
    exemplars: tuple[Exemplar, ...] = ()

    def __post_init__(self):
        if self.delimiter is None:
            from .prompts import DELIMITERS

            object.__setattr__(self, "delimiter", DELIMITERS["curly"])

    def request_for(self, record: StylePairRecord) -> TransferRequest:
        return TransferRequest(
            input_text=record.source,
            source_style=record.source_style,
            target_style=record.target_style,
            template=self.template,
            delimiter=self.delimiter,
            exemplars=self.exemplars,
        )


def transfer_one(req: TransferRequest, cfg: RerankConfig, *,
                 max_new_tokens: int = 128, decode: DecodeConfig | None = None,
                 seed: int | None = None,
                 example_id: str | None = None) -> tuple[Candidate, dict]:
    """Transfer a single text and return the winner plus its audit record.

    Renders the prompt, requests ``cfg.k`` candidates with the closing
    delimiter as the stop string, re-extracts every completion (services may
    ignore the stop), drops empty extractions, and reranks the rest.
    """
    prompt = render_prompt(req)
    creq = CompletionRequest(
        prompt=prompt,
        max_new_tokens=max_new_tokens,
        num_candidates=cfg.k,
        stop=req.delimiter.close,
        seed=seed,
        decode=decode or DecodeConfig(),
    )
    resp = backends.complete(cfg.endpoints, creq)
    raw = [{"text": g.text, "gen_score": g.gen_score} for g in resp.candidates]
    pool = []
    for i, gen in enumerate(resp.candidates):
        extraction = extract_completion(gen.text, req.delimiter)
        if extraction.text:
            pool.append(Candidate(text=extraction.text, gen_score=gen.gen_score,
                                  index=i, unterminated=extraction.unterminated))
    if not pool:
        raise PipelineError(
            f"empty extraction pool for example {example_id!r}: "
            f"all {len(raw)} candidates extracted to empty text"
        )
    winner, scores = rerank(req, pool, cfg)
    baseline = top_beam_baseline(pool)
    record = {
        "id": example_id,
        "prompt": prompt,
        "raw_candidates": raw,
        **score_record(pool, scores, winner, baseline),
        "winner": winner.text,
        "baseline": baseline.text,
    }
    return winner, record


@dataclass(frozen=True)
class RunManifest:
    """Everything needed to audit or re-evaluate a corpus run."""

    run_id: str
    timestamp: str
    config: dict
    records: list[dict]
    summary: EvalSummary

    def successful_records(self) -> list[dict]:
        return [r for r in self.records if "error" not in r]


def _styles_in(records: list[StylePairRecord]) -> list[str]:
    names = {r.source_style.render() for r in records}
    names |= {r.target_style.render() for r in records}
    return sorted(names)


def _summarize(ok: list[dict], endpoints: backends.BackendEndpoints) -> EvalSummary:
    outputs = [r["winner"] for r in ok]
    sources = [r["source"] for r in ok]
    fields: dict = {"s_sbleu": metrics.self_sbleu(outputs, sources)}
    with_refs = [(r["winner"], r["reference"]) for r in ok if r.get("reference")]
    if with_refs:
        fields["r_sbleu"] = metrics.ref_sbleu([h for h, _ in with_refs],
                                              [r for _, r in with_refs])
    if endpoints.classifier is not None or endpoints.fill_mask is not None:
        labels = sorted({r["source_style"] for r in ok}
                        | {r["target_style"] for r in ok})
        if len(labels) >= 2:
            fields["accuracy"] = metrics.classifier_accuracy(
                outputs, [r["target_style"] for r in ok], endpoints,
                labels=labels)
    if endpoints.score is not None:
        fields["ppl"] = metrics.corpus_perplexity(outputs, endpoints)
    return EvalSummary(**fields)


def _run_config(plan: RequestTemplate, cfg: RerankConfig, *, jobs: int,
                seed: int | None, max_new_tokens: int,
                decode: DecodeConfig) -> dict:
    return {
        "template": (plan.template.value if isinstance(plan.template, TemplateKind)
                     else plan.template),
        "delimiter": {"name": delimiter_name(plan.delimiter),
                      "open": plan.delimiter.open,
                      "close": plan.delimiter.close},
        "shots": len(plan.exemplars),
        "k": cfg.k,
        "use_fluency": cfg.use_fluency,
        "strength_source": cfg.strength_source,
        "max_new_tokens": max_new_tokens,
        "decode": decode.to_wire(cfg.k),
        "endpoints": cfg.endpoints.snapshot(),
        "seed": seed,
        "jobs": jobs,
    }


def transfer_corpus(records: list[StylePairRecord], plan: RequestTemplate,
                    cfg: RerankConfig, *, jobs: int = DEFAULT_JOBS,
                    seed: int | None = None, max_new_tokens: int = 128,
                    decode: DecodeConfig | None = None) -> RunManifest:
    """Transfer every record with bounded concurrency and evaluate the winners.

    Per-example failures become error records and the run continues; the run
    itself fails only if every example fails. Records keep dataset order no
    matter the completion order, and per-example seeds derive from the run
    seed plus the record position.
    """
    if not records:
        raise PipelineError("transfer_corpus requires a non-empty record list")
    decode = decode or DecodeConfig()

    def one(item: tuple[int, StylePairRecord]) -> dict:
        index, rec = item
        base = {
            "id": rec.id,
            "source": rec.source,
            "reference": rec.reference,
            "source_style": rec.source_style.render(),
            "target_style": rec.target_style.render(),
        }
        try:
            req = plan.request_for(rec)
            _, record = transfer_one(
                req, cfg, max_new_tokens=max_new_tokens, decode=decode,
                seed=None if seed is None else seed + index,
                example_id=rec.id)
        except (BackendError, PipelineError, ValueError) as exc:
            logger.warning("example %s failed: %s", rec.id, exc)
            return {**base, "error": f"{type(exc).__name__}: {exc}"}
        record.update(base)
        return record

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as executor:
        out_records = list(executor.map(one, enumerate(records)))

    ok = [r for r in out_records if "error" not in r]
    if not ok:
        raise PipelineError(
            f"all {len(records)} examples failed; first error: "
            f"{out_records[0].get('error')}"
        )
    summary = _summarize(ok, cfg.endpoints)
    config = _run_config(plan, cfg, jobs=jobs, seed=seed,
                         max_new_tokens=max_new_tokens, decode=decode)
    run_id = hashlib.sha256(
        json.dumps(config, sort_keys=True).encode("utf-8")).hexdigest()[:12]
    return RunManifest(
        run_id=run_id,
        timestamp=datetime.now(timezone.utc).isoformat(),
        config=config,
        records=out_records,
        summary=summary,
    )


def write_manifest(manifest: RunManifest, path: str) -> None:
    """JSONL: one header object, then one record object per example."""
    with open(path, "w", encoding="utf-8") as fh:
        header = {"run_id": manifest.run_id, "timestamp": manifest.timestamp,
                  "config": manifest.config,
                  "summary": manifest.summary.to_dict()}
        fh.write(json.dumps(header) + "\n")
        for record in manifest.records:
            fh.write(json.dumps(record) + "\n")


def read_manifest(path: str) -> RunManifest:
    with open(path, encoding="utf-8") as fh:
        lines = [line for line in fh if line.strip()]
    if not lines:
        raise PipelineError(f"{path} is not a manifest: empty file")
    header = json.loads(lines[0])
    return RunManifest(
        run_id=header["run_id"],
        timestamp=header["timestamp"],
        config=header["config"],
        records=[json.loads(line) for line in lines[1:]],
        summary=EvalSummary.from_dict(header["summary"]),
    )


def reevaluate_manifest(manifest: RunManifest) -> EvalSummary:
    """Recompute the evaluation summary from a manifest's own records.

    Endpoints are rebuilt from the stored config snapshot; with
    deterministic backends this reproduces the stored summary exactly.
    Metric changes can therefore be re-applied without regeneration.
    """
    snapshot = manifest.config.get("endpoints", {})

    def url(name):
        value = snapshot.get(name)
        if isinstance(value, str) and not value.startswith("object:"):
            return value
        return None

    endpoints = backends.BackendEndpoints(
        complete=url("complete"), score=url("score"),
        fill_mask=url("fill_mask"), embed=url("embed"),
        classifier=url("classifier"),
        mask_token=snapshot.get("mask_token", "<mask>"),
    )
    ok = manifest.successful_records()
    if not ok:
        raise PipelineError("manifest has no successful records to evaluate")
    return _summarize(ok, endpoints)


@dataclass(frozen=True)
class SweepGrid:
    """The axes of a prompt-design sweep; every axis must be non-empty."""

    templates: tuple[TemplateKind, ...] = tuple(TemplateKind)
    delimiters: tuple[DelimiterPair, ...] = ()
    directions: tuple[tuple[str, str], ...] = ()
    shots: tuple[int, ...] = (0,)

    def __post_init__(self):
        if not self.delimiters:
            from .prompts import builtin_delimiters

            object.__setattr__(self, "delimiters", tuple(builtin_delimiters()))
        for name, axis in (("templates", self.templates),
                           ("delimiters", self.delimiters),
                           ("directions", self.directions),
                           ("shots", self.shots)):
            if not axis:
                raise ValueError(f"sweep grid axis {name!r} is empty")


def directions_in(records: list[StylePairRecord]) -> tuple[tuple[str, str], ...]:
    """Distinct (source, target) style directions, in first-seen order."""
    seen: dict[tuple[str, str], None] = {}
    for r in records:
        seen.setdefault((r.source_style.render(), r.target_style.render()), None)
    return tuple(seen)


@dataclass
class SweepResult:
    rows: list[dict] = field(default_factory=list)
    manifests: list[RunManifest] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=SWEEP_CSV_COLUMNS,
                                extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            formatted = dict(row)
            for key in ("accuracy", "r_sbleu", "s_sbleu", "ppl"):
                value = formatted.get(key)
                formatted[key] = "" if value is None else f"{value:.4f}"
            writer.writerow(formatted)
        return buf.getvalue()

    def save_csv(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_csv())


def run_sweep(records: list[StylePairRecord], grid: SweepGrid,
              cfg: RerankConfig, *,
              exemplars_by_direction: dict[tuple[str, str],
                                           tuple[Exemplar, ...]] | None = None,
              jobs: int = DEFAULT_JOBS, seed: int | None = None,
              max_new_tokens: int = 128,
              decode: DecodeConfig | None = None) -> SweepResult:
    """One corpus run per grid cell, collected into a CSV-ready table.

    Cell failures are isolated: the failing cell's row keeps empty metric
    columns and the sweep continues. Rows follow grid iteration order
    (templates, then delimiters, directions, shots), so runs with
    deterministic backends produce byte-identical CSV output.
    """
    result = SweepResult()
    for template in grid.templates:
        for delimiter in grid.delimiters:
            for direction in grid.directions:
                for shots in grid.shots:
                    row = {
                        "template": template_name(template),
                        "delimiter": delimiter_name(delimiter),
                        "direction": f"{direction[0]}->{direction[1]}",
                        "shots": shots,
                    }
                    try:
                        row.update(_sweep_cell(
                            records, template, delimiter, direction, shots,
                            cfg, exemplars_by_direction, jobs, seed,
                            max_new_tokens, decode, result))
                    except (BackendError, PipelineError, ValueError) as exc:
                        logger.warning("sweep cell %s failed: %s", row, exc)
                        row["error"] = f"{type(exc).__name__}: {exc}"
                    result.rows.append(row)
    return result


def _sweep_cell(records, template, delimiter, direction, shots, cfg,
                exemplars_by_direction, jobs, seed, max_new_tokens, decode,
                result: SweepResult) -> dict:
    subset = [r for r in records
              if (r.source_style.render(), r.target_style.render()) == direction]
    if not subset:
        raise PipelineError(f"no records in direction {direction[0]}->{direction[1]}")
    exemplars: tuple[Exemplar, ...] = ()
    if shots > 0:
        available = (exemplars_by_direction or {}).get(direction, ())
        if len(available) < shots:
            raise PipelineError(
                f"{shots}-shot cell needs {shots} exemplars for direction "
                f"{direction[0]}->{direction[1]}, got {len(available)}"
            )
        exemplars = tuple(available[:shots])
    plan = RequestTemplate(template=template, delimiter=delimiter,
                           exemplars=exemplars)
    manifest = transfer_corpus(subset, plan, cfg, jobs=jobs, seed=seed,
                               max_new_tokens=max_new_tokens, decode=decode)
    result.manifests.append(manifest)
    summary = manifest.summary
    return {"accuracy": summary.accuracy, "r_sbleu": summary.r_sbleu,
            "s_sbleu": summary.s_sbleu, "ppl": summary.ppl}


def copy_baseline(records: list[StylePairRecord],
                  endpoints: backends.BackendEndpoints | None = None) -> EvalSummary:
    """Evaluate the do-nothing baseline that outputs every source verbatim.

    s-sBLEU is 100 by construction; reference metrics (r-sBLEU, GLEU, exact
    match) are computed where references exist, and classifier accuracy when
    an endpoint is supplied.
    """
    if not records:
        raise PipelineError("copy_baseline requires a non-empty record list")
    outputs = [r.source for r in records]
    fields: dict = {"s_sbleu": metrics.self_sbleu(outputs, outputs)}
    refs = [(r.source, r.reference) for r in records if r.reference]
    if refs:
        fields["r_sbleu"] = metrics.ref_sbleu([s for s, _ in refs],
                                              [ref for _, ref in refs])
        fields["gleu"] = metrics.corpus_gleu(
            [s for s, _ in refs], [s for s, _ in refs],
            [ref for _, ref in refs])
        fields["exact_match"] = metrics.exact_match_accuracy(
            [s for s, _ in refs], [ref for _, ref in refs])
    if endpoints is not None and (endpoints.fill_mask is not None
                                  or endpoints.classifier is not None):
        labels = _styles_in(records)
        if len(labels) >= 2:
            fields["accuracy"] = metrics.classifier_accuracy(
                outputs, [r.target_style.render() for r in records],
                endpoints, labels=labels)
    return EvalSummary(**fields)
