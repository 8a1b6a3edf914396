"""Command-line front end.

Subcommands: ``transfer`` (single text or a whole dataset), ``sweep``
(prompt-design grid), ``symb`` (generate the synthetic comparison corpus),
``clean`` (text cleanup), and ``eval`` (recompute metrics from a manifest or
plain text files). Backend endpoints come from RESTYLE_*_URL environment
variables; ``mock://`` URLs select the in-process mock backends.

Exit codes: 0 success, 1 backend failure, 2 configuration or usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .backends import BackendEndpoints, BackendError, DecodeConfig
from .data import (
    DatasetError,
    SymbSpec,
    clean_text,
    generate_symb,
    load_dataset,
    save_records,
)
from .metrics import (
    EvalSummary,
    MetricError,
    corpus_gleu,
    corpus_perplexity,
    exact_match_accuracy,
    ref_sbleu,
    self_sbleu,
)
from .pipeline import (
    PipelineError,
    RequestTemplate,
    SweepGrid,
    copy_baseline,
    directions_in,
    read_manifest,
    reevaluate_manifest,
    run_sweep,
    transfer_corpus,
    transfer_one,
    write_manifest,
)
from .prompts import (
    DELIMITERS,
    Exemplar,
    PromptError,
    TemplateKind,
    TransferRequest,
    delimiter_by_name,
    load_prompt_config,
    parse_style,
)
from .reranking import RerankConfig


class CliError(Exception):
    """Configuration problem detected before any backend call."""


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _resolve_template(name: str, custom: dict[str, str]) -> TemplateKind | str:
    normalized = name.strip().lower().replace("-", "_")
    try:
        return TemplateKind(normalized)
    except ValueError:
        if name in custom:
            return custom[name]
        known = [t.value for t in TemplateKind] + sorted(custom)
        raise CliError(f"unknown template {name!r}; choose from {known}") from None


def _resolve_delimiter(name: str, custom: dict) -> object:
    if name in custom:
        return custom[name]
    try:
        return delimiter_by_name(name)
    except PromptError as exc:
        raise CliError(str(exc)) from None


def _prompt_config(args) -> tuple[dict, dict]:
    if getattr(args, "prompt_config", None):
        cfg = load_prompt_config(args.prompt_config)
        return cfg.templates, cfg.delimiters
    return {}, {}


def _rerank_config(args, endpoints: BackendEndpoints) -> RerankConfig:
    return RerankConfig(
        k=args.k,
        use_fluency=not args.no_fluency,
        strength_source=args.strength_source,
        endpoints=endpoints,
    )


def _decode_config(args) -> DecodeConfig:
    return DecodeConfig(mode=args.decode_mode, beam_width=args.beam_width,
                        temperature=args.temperature)


def _require_endpoints(endpoints: BackendEndpoints, args) -> None:
    missing = [name for name, value in (
        ("RESTYLE_COMPLETE_URL", endpoints.complete),
        ("RESTYLE_FILL_MASK_URL", endpoints.fill_mask),
        ("RESTYLE_EMBED_URL", endpoints.embed),
    ) if value is None]
    if not args.no_fluency and endpoints.score is None:
        missing.append("RESTYLE_SCORE_URL (or pass --no-fluency)")
    if missing:
        raise CliError("missing backend endpoints: " + ", ".join(missing))


def _load_exemplars(path: str, format: str, source_style, target_style,
                    shots: int) -> tuple[Exemplar, ...]:
    records = load_dataset(path, format)
    exemplars = [
        Exemplar(input=r.source, output=r.reference,
                 source_style=r.source_style, target_style=r.target_style)
        for r in records
        if r.reference and r.source_style == source_style
        and r.target_style == target_style
    ]
    if len(exemplars) < shots:
        raise CliError(
            f"{path} provides {len(exemplars)} exemplars for "
            f"{source_style.render()}->{target_style.render()}, need {shots}"
        )
    return tuple(exemplars[:shots])


def _emit(payload: dict, args) -> None:
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        for key, value in payload.items():
            if isinstance(value, dict):
                print(f"{key}:")
                for inner_key, inner_value in value.items():
                    print(f"  {inner_key}: {_fmt(inner_value)}")
            else:
                print(f"{key}: {_fmt(value)}")


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.4f}"
    return "-" if value is None else str(value)


def cmd_transfer(args) -> int:
    templates, delimiters = _prompt_config(args)
    template = _resolve_template(args.template, templates)
    delimiter = _resolve_delimiter(args.delimiter, delimiters)
    endpoints = BackendEndpoints.from_env()
    _require_endpoints(endpoints, args)
    cfg = _rerank_config(args, endpoints)
    decode = _decode_config(args)
    source_style = parse_style(args.from_style)
    target_style = parse_style(args.to_style)

    exemplars: tuple[Exemplar, ...] = ()
    if args.shots:
        if not args.exemplars:
            raise CliError("--shots > 0 requires --exemplars FILE")
        exemplars = _load_exemplars(args.exemplars, args.format, source_style,
                                    target_style, args.shots)

    if args.text is not None:
        req = TransferRequest(
            input_text=clean_text(args.text) if args.clean else args.text,
            source_style=source_style, target_style=target_style,
            template=template, delimiter=delimiter, exemplars=exemplars)
        winner, record = transfer_one(req, cfg, max_new_tokens=args.max_new_tokens,
                                      decode=decode, seed=args.seed,
                                      example_id="cli-0")
        if args.json:
            print(json.dumps(record, indent=2))
        else:
            print(winner.text)
        return 0

    if not args.dataset:
        raise CliError("provide either --text or --dataset")
    records = load_dataset(args.dataset, args.format, clean=args.clean,
                           strict=args.strict)
    records = [r for r in records
               if r.source_style == source_style and r.target_style == target_style]
    if not records:
        raise CliError("no dataset records match the requested style direction")
    plan = RequestTemplate(template=template, delimiter=delimiter,
                           exemplars=exemplars)
    manifest = transfer_corpus(records, plan, cfg, jobs=args.jobs,
                               seed=args.seed, max_new_tokens=args.max_new_tokens,
                               decode=decode)
    if args.out:
        write_manifest(manifest, args.out)
    if not args.json:
        for rec in manifest.records:
            if "error" in rec:
                print(f"{rec['id']}: ERROR {rec['error']}")
            else:
                print(f"{rec['id']}: {rec['winner']}")
    payload = {"run_id": manifest.run_id,
               "examples": len(manifest.records),
               "failed": len(manifest.records) - len(manifest.successful_records()),
               "summary": manifest.summary.to_dict()}
    if args.out:
        payload["manifest"] = args.out
    _emit(payload, args)
    return 0


def cmd_sweep(args) -> int:
    templates_cfg, delimiters_cfg = _prompt_config(args)
    endpoints = BackendEndpoints.from_env()
    _require_endpoints(endpoints, args)
    cfg = _rerank_config(args, endpoints)
    records = load_dataset(args.dataset, args.format, clean=args.clean,
                           strict=args.strict)
    if not records:
        raise CliError(f"{args.dataset} contains no records")

    template_names = (args.templates.split(",") if args.templates
                      else [t.value for t in TemplateKind])
    templates = tuple(_resolve_template(n, templates_cfg) for n in template_names)
    delimiter_names = (args.delimiters.split(",") if args.delimiters
                       else list(DELIMITERS))
    delimiters = tuple(_resolve_delimiter(n, delimiters_cfg)
                       for n in delimiter_names)
    if args.directions:
        directions = []
        for item in args.directions.split(","):
            if ":" not in item:
                raise CliError(f"direction {item!r} must look like from:to")
            s1, s2 = item.split(":", 1)
            directions.append((s1.strip(), s2.strip()))
        directions = tuple(directions)
    else:
        directions = directions_in(records)
    shots = tuple(int(s) for s in args.shots.split(","))

    exemplars_by_direction = None
    if any(s > 0 for s in shots):
        if not args.exemplars:
            raise CliError("sweep with shots > 0 requires --exemplars FILE")
        exemplars_by_direction = {}
        for direction in directions:
            exemplars_by_direction[direction] = _load_exemplars(
                args.exemplars, args.format, parse_style(direction[0]),
                parse_style(direction[1]), max(shots))

    grid = SweepGrid(templates=templates, delimiters=delimiters,
                     directions=directions, shots=shots)
    result = run_sweep(records, grid, cfg,
                       exemplars_by_direction=exemplars_by_direction,
                       jobs=args.jobs, seed=args.seed,
                       max_new_tokens=args.max_new_tokens,
                       decode=_decode_config(args))
    if args.out:
        result.save_csv(args.out)
        print(f"wrote {len(result.rows)} rows to {args.out}")
    else:
        sys.stdout.write(result.to_csv())
    failed = sum(1 for row in result.rows if "error" in row)
    if failed:
        print(f"{failed} of {len(result.rows)} cells failed", file=sys.stderr)
    return 0


def cmd_symb(args) -> int:
    spec = SymbSpec(n=args.n, seed=args.seed if args.seed is not None else 0)
    records = generate_symb(spec)
    save_records(records, args.out, args.format)
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def cmd_clean(args) -> int:
    stream_in = sys.stdin if args.input_path == "-" else open(
        args.input_path, encoding="utf-8")
    try:
        lines = [clean_text(line) for line in stream_in]
    finally:
        if stream_in is not sys.stdin:
            stream_in.close()
    body = "\n".join(lines) + ("\n" if lines else "")
    if args.output_path == "-":
        sys.stdout.write(body)
    else:
        with open(args.output_path, "w", encoding="utf-8") as fh:
            fh.write(body)
    return 0


def _read_lines(path: str) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh]


def cmd_eval(args) -> int:
    if args.manifest:
        manifest = read_manifest(args.manifest)
        summary = reevaluate_manifest(manifest)
        _emit({"run_id": manifest.run_id, "summary": summary.to_dict()}, args)
        return 0
    if not args.hyp:
        raise CliError("provide --manifest or --hyp (with --src/--ref)")
    hyps = _read_lines(args.hyp)
    srcs = _read_lines(args.src) if args.src else None
    refs = _read_lines(args.ref) if args.ref else None
    for name, lines in (("--src", srcs), ("--ref", refs)):
        if lines is not None and len(lines) != len(hyps):
            raise CliError(f"{name} has {len(lines)} lines, --hyp has {len(hyps)}")
    fields: dict = {}
    if srcs is not None:
        fields["s_sbleu"] = self_sbleu(hyps, srcs)
    if refs is not None:
        fields["r_sbleu"] = ref_sbleu(hyps, refs)
        fields["exact_match"] = exact_match_accuracy(hyps, refs)
    if srcs is not None and refs is not None:
        fields["gleu"] = corpus_gleu(srcs, hyps, refs)
    endpoints = BackendEndpoints.from_env()
    if endpoints.score is not None:
        fields["ppl"] = corpus_perplexity(hyps, endpoints)
    _emit({"summary": EvalSummary(**fields).to_dict()}, args)
    return 0


def cmd_copy_baseline(args) -> int:
    records = load_dataset(args.dataset, args.format, clean=args.clean,
                           strict=args.strict)
    endpoints = BackendEndpoints.from_env()
    has_classifier = endpoints.fill_mask is not None or endpoints.classifier is not None
    summary = copy_baseline(records, endpoints if has_classifier else None)
    _emit({"summary": summary.to_dict()}, args)
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None,
                        help="base seed forwarded to the backends")
    parser.add_argument("--json", action="store_true",
                        help="machine-readable output")
    parser.add_argument("--verbose", action="store_true")


def _add_generation(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--k", type=_positive_int, default=3,
                        help="candidates per example (default 3)")
    parser.add_argument("--max-new-tokens", type=_positive_int, default=128)
    parser.add_argument("--no-fluency", action="store_true",
                        help="drop the fluency factor from reranking")
    parser.add_argument("--strength-source", default="mlm_cloze",
                        choices=["mlm_cloze", "external_classifier"])
    parser.add_argument("--decode-mode", default="beam", choices=["beam", "sample"])
    parser.add_argument("--beam-width", type=_positive_int, default=None,
                        help="defaults to --k")
    parser.add_argument("--temperature", type=float, default=1.0)
    parser.add_argument("--jobs", type=_positive_int, default=4,
                        help="concurrent in-flight examples")
    parser.add_argument("--prompt-config", default=None,
                        help="JSON file adding templates/delimiters")
    parser.add_argument("--clean", action="store_true",
                        help="apply text cleanup to inputs")
    parser.add_argument("--strict", action="store_true",
                        help="fail on malformed dataset rows")


def build_parser() -> argparse.ArgumentParser:
    delim_help = ", ".join(f"{name} ({pair.open} {pair.close})"
                           for name, pair in DELIMITERS.items())
    parser = argparse.ArgumentParser(
        prog="restyle",
        description="Prompt-based textual style transfer with candidate reranking.",
        epilog=f"delimiter names: {delim_help}",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transfer", help="transfer one text or a dataset")
    p.add_argument("--text", help="single input text")
    p.add_argument("--dataset", help="JSONL/TSV dataset path")
    p.add_argument("--format", default="jsonl", choices=["jsonl", "tsv"])
    p.add_argument("--from", dest="from_style", required=True,
                   help="source style ('not X' negates)")
    p.add_argument("--to", dest="to_style", required=True, help="target style")
    p.add_argument("--template", default="contrastive")
    p.add_argument("--delimiter", default="curly")
    p.add_argument("--shots", type=int, default=0)
    p.add_argument("--exemplars", help="dataset file supplying few-shot exemplars")
    p.add_argument("--out", help="manifest output path (dataset mode)")
    _add_generation(p)
    _add_common(p)
    p.set_defaults(func=cmd_transfer)

    p = sub.add_parser("sweep", help="template x delimiter x direction sweep")
    p.add_argument("--dataset", required=True)
    p.add_argument("--format", default="jsonl", choices=["jsonl", "tsv"])
    p.add_argument("--templates", help="comma list (default: all four)")
    p.add_argument("--delimiters", help="comma list of names (default: all ten)")
    p.add_argument("--directions", help="comma list of from:to pairs "
                                        "(default: all in the dataset)")
    p.add_argument("--shots", default="0", help="comma list, e.g. 0,4")
    p.add_argument("--exemplars", help="dataset file supplying few-shot exemplars")
    p.add_argument("--out", help="CSV output path (default: stdout)")
    _add_generation(p)
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("symb", help="generate the symbolic comparison dataset")
    p.add_argument("--n", type=_positive_int, default=1000)
    p.add_argument("--out", required=True)
    p.add_argument("--format", default="jsonl", choices=["jsonl", "tsv"])
    _add_common(p)
    p.set_defaults(func=cmd_symb)

    p = sub.add_parser("clean", help="clean text files line by line")
    p.add_argument("--in", dest="input_path", required=True,
                   help="input path or - for stdin")
    p.add_argument("--out", dest="output_path", default="-",
                   help="output path or - for stdout")
    _add_common(p)
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("eval", help="recompute metrics from a manifest or files")
    p.add_argument("--manifest", help="run manifest (JSONL)")
    p.add_argument("--hyp", help="hypothesis file, one text per line")
    p.add_argument("--src", help="source file (enables s-sBLEU and GLEU)")
    p.add_argument("--ref", help="reference file (enables r-sBLEU and GLEU)")
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("copy-baseline",
                       help="evaluate the copy-the-input baseline on a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--format", default="jsonl", choices=["jsonl", "tsv"])
    p.add_argument("--clean", action="store_true")
    p.add_argument("--strict", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_copy_baseline)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (BackendError, PipelineError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (PromptError, DatasetError, MetricError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
