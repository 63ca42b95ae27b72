"""Command-line interface.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from gaprep import nci, pipeline
from gaprep.errors import ConfigError, DataError, GaprepError
from gaprep.evalcloze import read_items, read_judgments, read_predictions, report as cloze_report
from gaprep.evalmwe import read_cupt, score_spans, to_bio
from gaprep.evalparse import evaluate, read_conllu, render_table
from gaprep.filters import FilterConfig, FilterReport, LangIdEngines, basic_verdict, char_lang_verdict, document_verdict
from gaprep.langid import default_profiles
from gaprep.pretrain import GenConfig, build_instances, instance_to_json, write_shard
from gaprep.segmenter import SegmenterConfig, segment
from gaprep.tokenizer import DEFAULT_RULES, tokenize_surfaces
from gaprep.vocab import UnigramModel, Vocabulary, convert_sp_to_wp, train_unigram, train_wordpiece, union_vocab


def _open_in(path: str | None):
    return open(path, encoding="utf-8") if path else sys.stdin


def _open_out(path: str | None):
    return open(path, "w", encoding="utf-8") if path else sys.stdout


def _load_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc.msg} at line {exc.lineno}") from exc


def cmd_stats(args) -> int:
    run = pipeline.PipelineRun(args.manifest, args.out, stages=("stats",))
    pipeline.execute(run)
    print(json.dumps(_load_json(str(Path(args.out) / "stats.json")), indent=2, sort_keys=True))
    return 0


def cmd_normalize_nci(args) -> int:
    reader = nci.VertReader(args.input)
    with _open_out(args.out) as out:
        for tokens in reader.segments():
            out.write(" ".join(nci.normalize_entities(tokens)) + "\n")
    if reader.skipped_empty:
        print(f"warning: skipped {reader.skipped_empty} token lines with empty column 1", file=sys.stderr)
    return 0


def cmd_segment(args) -> int:
    cfg = SegmenterConfig.from_dict(_load_json(args.config)) if args.config else SegmenterConfig()
    with _open_in(args.input) as fin, _open_out(args.out) as out:
        for line in fin:
            line = line.rstrip("\n")
            if not line.strip():
                out.write("\n")
                continue
            for sent in segment(line.split(), cfg):
                out.write(" ".join(sent) + "\n")
    return 0


def cmd_tokenize(args) -> int:
    with _open_in(args.input) as fin, _open_out(args.out) as out:
        for line in fin:
            line = line.rstrip("\n")
            if not line.strip():
                out.write("\n")
                continue
            tokens = line.split() if args.pretokenized else tokenize_surfaces(line, DEFAULT_RULES)
            out.write(" ".join(tokens) + "\n")
    return 0


def cmd_filter(args) -> int:
    overrides = _load_json(args.config) if args.config else {}
    overrides["mode"] = args.mode
    cfg = FilterConfig.from_dict(overrides)
    engines = LangIdEngines(default_profiles()) if cfg.mode == "opusfilter-basic-char-lang" else None
    report = FilterReport(cfg.mode)
    with _open_in(args.input) as fin, _open_out(args.out) as out:
        doc: list[list[str]] = []
        wrote_doc = False

        def flush(doc):
            nonlocal wrote_doc
            report.input_documents += 1
            if cfg.mode == "document-filter":
                rule = document_verdict(doc, cfg)
                rules = [rule] * len(doc)
            elif cfg.mode == "no-filter":
                rules = [None] * len(doc)
            elif cfg.mode == "opusfilter-basic":
                rules = [basic_verdict(s, cfg) for s in doc]
            else:
                rules = [char_lang_verdict(s, cfg, engines) for s in doc]
            kept = []
            for sent, rule in zip(doc, rules):
                report.record(len(sent), rule)
                if rule is None:
                    kept.append(" ".join(sent))
            if kept:
                if wrote_doc:
                    out.write("\n")
                out.write("\n".join(kept) + "\n")
                wrote_doc = True
                report.kept_documents += 1

        for line in fin:
            line = line.rstrip("\n")
            if not line.strip():
                if doc:
                    flush(doc)
                    doc = []
                continue
            doc.append(line.split())
        if doc:
            flush(doc)
    payload = json.dumps(report.as_dict(), indent=2, sort_keys=True)
    if args.report:
        Path(args.report).write_text(payload + "\n", "utf-8")
    else:
        print(payload, file=sys.stderr)
    return 0


def _corpus_lines(paths: list[str]):
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if line.strip():
                    yield line


def cmd_train_vocab(args) -> int:
    if args.algo == "wordpiece":
        vocab = train_wordpiece(_corpus_lines(args.input), args.size)
        with _open_out(args.out) as fh:
            vocab.save(fh)
    else:
        model = train_unigram(_corpus_lines(args.input), args.size)
        with _open_out(args.out) as fh:
            json.dump({"pieces": model.pieces}, fh, ensure_ascii=False)
            fh.write("\n")
    return 0


def cmd_convert_vocab(args) -> int:
    raw = _load_json(args.input)
    model = UnigramModel(dict(raw["pieces"]))
    vocab = convert_sp_to_wp(model)
    with _open_out(args.out) as fh:
        vocab.save(fh)
    return 0


def cmd_union_vocab(args) -> int:
    with open(args.a, encoding="utf-8") as fh:
        a = Vocabulary.load(fh)
    with open(args.b, encoding="utf-8") as fh:
        b = Vocabulary.load(fh)
    with _open_out(args.out) as fh:
        union_vocab(a, b).save(fh)
    return 0


def _read_documents(paths: list[str]):
    for path in paths:
        doc: list[list[str]] = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if not line.strip():
                    if doc:
                        yield doc
                        doc = []
                    continue
                doc.append(line.split())
        if doc:
            yield doc


def cmd_pretrain_data(args) -> int:
    with open(args.vocab, encoding="utf-8") as fh:
        vocab = Vocabulary.load(fh)
    cfg = GenConfig(seed=args.seed, max_seq_len=args.seq_len, dupe_factor=args.dupe_factor)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    instances = build_instances(_read_documents(args.input), vocab, cfg)
    if args.jsonl:
        with open(out_dir / "instances.jsonl", "w", encoding="utf-8") as fh:
            for inst in instances:
                fh.write(instance_to_json(inst) + "\n")
    shard_path = out_dir / "shard-00000.bin"
    with open(shard_path, "wb") as fh:
        count = write_shard(instances, fh)
    meta = {
        "seq_len": cfg.max_seq_len,
        "seed": cfg.seed,
        "dupe_factor": cfg.dupe_factor,
        "total_instances": count,
        "shards": [{"path": shard_path.name, "instances": count}],
    }
    (out_dir / "manifest.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", "utf-8")
    print(json.dumps(meta, indent=2, sort_keys=True))
    return 0


def cmd_eval_parse(args) -> int:
    gold = read_conllu(args.gold)
    system = read_conllu(args.system)
    scores = evaluate(gold, system)
    print(json.dumps(scores.as_dict(), indent=2, sort_keys=True))
    print(render_table(scores))
    return 0


def cmd_eval_cloze(args) -> int:
    with open(args.items, encoding="utf-8") as fh:
        items = read_items(fh)
    with open(args.preds, encoding="utf-8") as fh:
        preds = read_predictions(fh)
    judgments = None
    if args.judgments:
        with open(args.judgments, encoding="utf-8") as fh:
            judgments = read_judgments(fh)
    print(json.dumps(cloze_report(items, preds, judgments), indent=2, sort_keys=True))
    return 0


def cmd_eval_mwe(args) -> int:
    gold = read_cupt(args.gold)
    pred = read_cupt(args.pred)
    p, r, f1 = score_spans([s.annotations for s in gold], [s.annotations for s in pred])
    print(json.dumps({"precision": round(p, 3), "recall": round(r, 3), "f1": round(f1, 3)}, indent=2))
    return 0


def cmd_mwe_to_bio(args) -> int:
    dropped_total = 0
    with _open_out(args.out) as out:
        for sentence in read_cupt(args.input):
            tags, dropped = to_bio(sentence)
            dropped_total += dropped
            for form, tag in zip(sentence.forms, tags):
                out.write(f"{form}\t{tag}\n")
            out.write("\n")
    if dropped_total:
        print(f"warning: dropped {dropped_total} overlapping span(s)", file=sys.stderr)
    return 0


def cmd_run(args) -> int:
    overrides = _load_json(args.config) if args.config else {}
    filter_cfg = FilterConfig.from_dict(overrides.get("filter", {}))
    seg_cfg = SegmenterConfig.from_dict(overrides.get("segmenter", {}))
    gen_cfg = GenConfig.from_dict(overrides.get("pretrain", {}))
    if args.seed is not None:
        gen_cfg = GenConfig.from_dict({**overrides.get("pretrain", {}), "seed": args.seed})
    stages = tuple(args.stages) if args.stages else pipeline.CANONICAL_STAGES
    run = pipeline.PipelineRun(
        manifest_path=args.manifest,
        out_dir=args.out,
        stages=stages,
        filter_config=filter_cfg,
        segmenter_config=seg_cfg,
        gen_config=gen_cfg,
        vocab_size=int(overrides.get("vocab_size", 30000)),
        shard_docs=int(overrides.get("shard_docs", 2000)),
        vocab_file=overrides.get("vocab_file"),
        pretokenized=bool(overrides.get("pretokenized", False)),
    )
    report = pipeline.execute(run)
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gaprep", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="prepare corpora and report Table-style stats")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("normalize-nci", help="entity-normalize a .vert file to tokenized segments")
    p.add_argument("input")
    p.add_argument("--out")
    p.set_defaults(func=cmd_normalize_nci)

    p = sub.add_parser("segment", help="split tokenized segments (one per line) into sentences")
    p.add_argument("--in", dest="input")
    p.add_argument("--out")
    p.add_argument("--config", help="JSON overrides for the segmenter configuration")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("tokenize", help="tokenize raw text lines")
    p.add_argument("--in", dest="input")
    p.add_argument("--out")
    p.add_argument("--pretokenized", action="store_true", help="passthrough: split on whitespace only")
    p.set_defaults(func=cmd_tokenize)

    p = sub.add_parser("filter", help="filter a prepared corpus file")
    p.add_argument("--mode", required=True, choices=["no-filter", "document-filter", "opusfilter-basic", "opusfilter-basic-char-lang"])
    p.add_argument("--in", dest="input")
    p.add_argument("--out")
    p.add_argument("--report", help="write the JSON filter report here")
    p.add_argument("--config", help="JSON overrides for FilterConfig")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("train-vocab", help="train a subword vocabulary")
    p.add_argument("--algo", choices=["wordpiece", "unigram"], required=True)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--in", dest="input", nargs="+", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_train_vocab)

    p = sub.add_parser("convert-vocab", help="convert a unigram model to a WordPiece vocab")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_convert_vocab)

    p = sub.add_parser("union-vocab", help="union two vocabulary files")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--out")
    p.set_defaults(func=cmd_union_vocab)

    p = sub.add_parser("pretrain-data", help="build masked-LM pretraining instances")
    p.add_argument("--in", dest="input", nargs="+", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seq-len", type=int, choices=[128, 512], default=128)
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--dupe-factor", type=int, default=10)
    p.add_argument("--jsonl", action="store_true", help="also write a JSONL debug dump")
    p.set_defaults(func=cmd_pretrain_data)

    p = sub.add_parser("eval-parse", help="score a system CoNLL-U file against gold")
    p.add_argument("gold")
    p.add_argument("system")
    p.set_defaults(func=cmd_eval_parse)

    p = sub.add_parser("eval-cloze", help="score cloze predictions and judgments")
    p.add_argument("--items", required=True)
    p.add_argument("--preds", required=True)
    p.add_argument("--judgments")
    p.set_defaults(func=cmd_eval_cloze)

    p = sub.add_parser("eval-mwe", help="span-level MWE identification scores")
    p.add_argument("gold")
    p.add_argument("pred")
    p.set_defaults(func=cmd_eval_mwe)

    p = sub.add_parser("mwe-to-bio", help="convert .cupt annotations to token/tag TSV")
    p.add_argument("input")
    p.add_argument("--out")
    p.set_defaults(func=cmd_mwe_to_bio)

    p = sub.add_parser("run", help="run the end-to-end pipeline")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--stages", nargs="+", choices=list(pipeline.CANONICAL_STAGES))
    p.add_argument("--config", help="JSON pipeline configuration")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_run)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except GaprepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except Exception as exc:  # noqa: BLE001 - map anything unexpected to exit 4
        print(f"internal error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
