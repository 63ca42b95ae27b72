"""End-to-end pipeline: prepare corpora, filter, build vocab, emit instances.

Canonical stage order::

    stats -> filter -> vocab -> instances

* ``stats``     reads every manifest corpus (format-aware), normalizes,
                segments and tokenizes as needed, writes ``prepared/`` and a
                per-corpus stats report (sentences / tokens / size).
* ``filter``    applies the configured filter mode to ``prepared/``, writes
                ``filtered/`` and the filter report (remaining counts).
* ``vocab``     trains WordPiece and unigram vocabularies on ``filtered/``,
                converts the unigram model and writes the union.
* ``instances`` packs ``filtered/`` into masked-LM pretraining shards.

A run is deterministic: same inputs, config and seed give byte-identical
artifacts.  The ``GAPREP_THREADS`` environment variable (default 1) enables
document-parallel filtering; results do not depend on it.
"""

from __future__ import annotations

import hashlib
import json
import multiprocessing
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from gaprep import nci
from gaprep.corpus import Manifest, ManifestEntry, load_manifest
from gaprep.errors import ConfigError, DataError, GaprepError
from gaprep.evalparse import read_conllu
from gaprep.filters import FilterConfig, FilterReport, LangIdEngines, basic_verdict, char_lang_verdict, document_verdict
from gaprep.langid import default_profiles
from gaprep.pretrain import GenConfig, build_instances, write_shard
from gaprep.segmenter import DEFAULT_CONFIG as DEFAULT_SEG_CONFIG
from gaprep.segmenter import SegmenterConfig, segment
from gaprep.tokenizer import DEFAULT_RULES, TokenizerRuleSet, tokenize_surfaces
from gaprep.vocab import Vocabulary, convert_sp_to_wp, train_unigram, train_wordpiece, union_vocab

CANONICAL_STAGES = ("stats", "filter", "vocab", "instances")
THREADS_ENV = "GAPREP_THREADS"


@dataclass(frozen=True)
class PipelineRun:
    manifest_path: str
    out_dir: str
    stages: tuple[str, ...] = CANONICAL_STAGES
    filter_config: FilterConfig = field(default_factory=FilterConfig)
    segmenter_config: SegmenterConfig = field(default_factory=lambda: DEFAULT_SEG_CONFIG)
    gen_config: GenConfig = field(default_factory=GenConfig)
    tokenizer_rules: TokenizerRuleSet = field(default_factory=lambda: DEFAULT_RULES)
    vocab_size: int = 30000
    shard_docs: int = 2000
    vocab_file: str | None = None
    pretokenized: bool = False

    def __post_init__(self):
        if tuple(self.stages) != CANONICAL_STAGES[: len(self.stages)] or not self.stages:
            raise ConfigError(
                f"stages must be a non-empty prefix of {CANONICAL_STAGES}, got {self.stages}"
            )


def threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        value = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
    return max(1, value)


# ---------------------------------------------------------------------------
# stage: stats (prepare + count)

def _prepare_plain(path: str, run: PipelineRun, out):
    stats = [0, 0, 0]
    pending_break = False
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line.strip():
                pending_break = True
                continue
            if run.pretokenized:
                tokens = line.split()
            else:
                tokens = tokenize_surfaces(line, run.tokenizer_rules)
            if not tokens:
                continue
            if pending_break and stats[0]:
                out.write("\n")
            pending_break = False
            for sent in segment(tokens, run.segmenter_config):
                text = " ".join(sent)
                out.write(text + "\n")
                stats[0] += 1
                stats[1] += len(sent)
                stats[2] += len(text.encode("utf-8")) + 1
    return stats


def _prepare_vert(path: str, run: PipelineRun, out):
    stats = [0, 0, 0]
    reader = nci.VertReader(path)
    last_doc = None
    for doc_idx, seg_tokens in reader.documents_flat():
        if last_doc is not None and doc_idx != last_doc and stats[0]:
            out.write("\n")
        last_doc = doc_idx
        for sent in segment(nci.normalize_entities(seg_tokens), run.segmenter_config):
            text = " ".join(sent)
            out.write(text + "\n")
            stats[0] += 1
            stats[1] += len(sent)
            stats[2] += len(text.encode("utf-8")) + 1
    return stats


def _prepare_conllu(path: str, out):
    stats = [0, 0, 0]
    for sentence in read_conllu(path):
        # surface token stream: each multiword range once, otherwise the word
        surfaces = [
            w.mwt_form if w.is_multiword else w.form
            for w in sentence
            if not w.is_multiword or w.mwt_form
        ]
        if not surfaces:
            continue
        text = " ".join(surfaces)
        out.write(text + "\n")
        stats[0] += 1
        stats[1] += len(surfaces)
        stats[2] += len(text.encode("utf-8")) + 1
    return stats


def stage_stats(run: PipelineRun, manifest: Manifest, report: dict) -> None:
    prepared_dir = Path(run.out_dir) / "prepared"
    prepared_dir.mkdir(parents=True, exist_ok=True)
    per_corpus = {}
    overall = [0, 0, 0]
    for name in manifest.names():
        entry: ManifestEntry = manifest[name]
        out_path = prepared_dir / f"{name}.txt"
        stats = [0, 0, 0]
        with open(out_path, "w", encoding="utf-8") as out:
            for i, path in enumerate(entry.paths):
                if not os.path.exists(path):
                    raise DataError(f"corpus {name!r}: input file not found: {path}")
                if i and stats[0]:
                    out.write("\n")
                if entry.format == "plain":
                    part = _prepare_plain(path, run, out)
                elif entry.format == "vert":
                    part = _prepare_vert(path, run, out)
                else:
                    part = _prepare_conllu(path, out)
                stats = [a + b for a, b in zip(stats, part)]
        per_corpus[name] = {
            "sentences": stats[0],
            "tokens": stats[1],
            "bytes": stats[2],
            "size_mb": round(stats[2] / 1_000_000, 3),
            "license": entry.license_tag,
        }
        overall = [a + b for a, b in zip(overall, stats)]
    report["stats"] = {
        "corpora": per_corpus,
        "overall": {
            "sentences": overall[0],
            "tokens": overall[1],
            "bytes": overall[2],
            "size_mb": round(overall[2] / 1_000_000, 3),
        },
    }
    stats_path = Path(run.out_dir) / "stats.json"
    stats_path.write_text(json.dumps(report["stats"], indent=2, sort_keys=True) + "\n", "utf-8")


# ---------------------------------------------------------------------------
# stage: filter

_WORKER_CFG: FilterConfig | None = None
_WORKER_ENGINES: LangIdEngines | None = None


def _init_filter_worker(cfg: FilterConfig, profiles) -> None:
    global _WORKER_CFG, _WORKER_ENGINES
    _WORKER_CFG = cfg
    _WORKER_ENGINES = LangIdEngines(profiles) if profiles is not None else None


def _doc_verdicts(doc: list[list[str]]) -> list[str | None]:
    cfg = _WORKER_CFG
    if cfg.mode == "opusfilter-basic":
        return [basic_verdict(s, cfg) for s in doc]
    if cfg.mode == "opusfilter-basic-char-lang":
        return [char_lang_verdict(s, cfg, _WORKER_ENGINES) for s in doc]
    if cfg.mode == "document-filter":
        rule = document_verdict(doc, cfg)
        return [rule] * len(doc)
    return [None] * len(doc)


def _parallel_verdicts(pool, docs):
    """Order-preserving parallel map in bounded batches (memory stays flat)."""
    batch: list[list[list[str]]] = []
    for doc in docs:
        batch.append(doc)
        if len(batch) >= 4096:
            yield from zip(batch, pool.map(_doc_verdicts, batch, chunksize=64))
            batch = []
    if batch:
        yield from zip(batch, pool.map(_doc_verdicts, batch, chunksize=64))


def _iter_surface_docs(path: Path):
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


def stage_filter(run: PipelineRun, manifest: Manifest, report: dict) -> None:
    prepared_dir = Path(run.out_dir) / "prepared"
    filtered_dir = Path(run.out_dir) / "filtered"
    filtered_dir.mkdir(parents=True, exist_ok=True)
    cfg = run.filter_config
    profiles = default_profiles() if cfg.mode == "opusfilter-basic-char-lang" else None

    n_threads = threads()
    pool = None
    if n_threads > 1:
        pool = multiprocessing.Pool(
            n_threads, initializer=_init_filter_worker, initargs=(cfg, profiles)
        )
    else:
        _init_filter_worker(cfg, profiles)

    total = FilterReport(cfg.mode)
    per_corpus = {}
    try:
        for name in manifest.names():
            src = prepared_dir / f"{name}.txt"
            if not src.exists():
                raise DataError(f"missing prepared corpus for filtering: {src}")
            corpus_report = FilterReport(cfg.mode)
            with open(filtered_dir / f"{name}.txt", "w", encoding="utf-8") as out:
                docs = _iter_surface_docs(src)
                if pool is not None:
                    pairs = _parallel_verdicts(pool, docs)
                else:
                    pairs = ((doc, _doc_verdicts(doc)) for doc in docs)
                wrote_doc = False
                for doc, verdicts in pairs:
                    corpus_report.input_documents += 1
                    kept_lines = []
                    for sent, rule in zip(doc, verdicts):
                        corpus_report.record(len(sent), rule)
                        if rule is None:
                            kept_lines.append(" ".join(sent))
                    if kept_lines:
                        if wrote_doc:
                            out.write("\n")
                        out.write("\n".join(kept_lines) + "\n")
                        wrote_doc = True
                        corpus_report.kept_documents += 1
            per_corpus[name] = corpus_report.as_dict()
            total = total.merge(corpus_report)
    finally:
        if pool is not None:
            pool.close()
            pool.join()

    report["filter"] = {"per_corpus": per_corpus, "overall": total.as_dict()}
    out_path = Path(run.out_dir) / "filter_report.json"
    out_path.write_text(json.dumps(report["filter"], indent=2, sort_keys=True) + "\n", "utf-8")


# ---------------------------------------------------------------------------
# stage: vocab

def _filtered_lines(run: PipelineRun, manifest: Manifest):
    filtered_dir = Path(run.out_dir) / "filtered"
    for name in manifest.names():
        path = filtered_dir / f"{name}.txt"
        if not path.exists():
            raise DataError(f"missing filtered corpus for vocab training: {path}")
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if line.strip():
                    yield line


def stage_vocab(run: PipelineRun, manifest: Manifest, report: dict) -> None:
    vocab_dir = Path(run.out_dir) / "vocab"
    vocab_dir.mkdir(parents=True, exist_ok=True)

    wp = train_wordpiece(_filtered_lines(run, manifest), run.vocab_size)
    with open(vocab_dir / "wordpiece.txt", "w", encoding="utf-8") as fh:
        wp.save(fh)

    unigram = train_unigram(_filtered_lines(run, manifest), run.vocab_size)
    (vocab_dir / "unigram.json").write_text(
        json.dumps({"pieces": unigram.pieces}, indent=0, sort_keys=False, ensure_ascii=False) + "\n",
        "utf-8",
    )
    converted = convert_sp_to_wp(unigram)
    with open(vocab_dir / "unigram_wp.txt", "w", encoding="utf-8") as fh:
        converted.save(fh)

    union = union_vocab(converted, wp)
    with open(vocab_dir / "union.txt", "w", encoding="utf-8") as fh:
        union.save(fh)

    report["vocab"] = {
        "wordpiece_entries": len(wp),
        "unigram_pieces": len(unigram.pieces),
        "converted_entries": len(converted),
        "union_entries": len(union),
    }


# ---------------------------------------------------------------------------
# stage: instances

def _load_vocab_for_instances(run: PipelineRun) -> Vocabulary:
    if run.vocab_file is not None:
        path = Path(run.vocab_file)
    else:
        path = Path(run.out_dir) / "vocab" / "union.txt"
        if not path.exists():
            raise ConfigError(
                "instances stage needs either the vocab stage output or an explicit vocab_file"
            )
    with open(path, encoding="utf-8") as fh:
        return Vocabulary.load(fh)


def stage_instances(run: PipelineRun, manifest: Manifest, report: dict) -> None:
    vocab = _load_vocab_for_instances(run)
    shards_dir = Path(run.out_dir) / "shards"
    shards_dir.mkdir(parents=True, exist_ok=True)

    filtered_dir = Path(run.out_dir) / "filtered"
    shard_index = 0
    shard_docs: list[list[list[str]]] = []
    shard_meta = []
    total_instances = 0

    def flush():
        nonlocal shard_index, shard_docs, total_instances
        if not shard_docs:
            return
        instances = build_instances(shard_docs, vocab, run.gen_config, shard_index=shard_index)
        path = shards_dir / f"shard-{shard_index:05d}.bin"
        with open(path, "wb") as fh:
            count = write_shard(instances, fh)
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        shard_meta.append({"path": path.name, "instances": count, "sha256": digest})
        total_instances += count
        shard_index += 1
        shard_docs = []

    for name in manifest.names():
        path = filtered_dir / f"{name}.txt"
        if not path.exists():
            raise DataError(f"missing filtered corpus for instance generation: {path}")
        for doc in _iter_surface_docs(path):
            shard_docs.append(doc)
            if len(shard_docs) >= run.shard_docs:
                flush()
    flush()

    meta = {
        "seq_len": run.gen_config.max_seq_len,
        "seed": run.gen_config.seed,
        "dupe_factor": run.gen_config.dupe_factor,
        "total_instances": total_instances,
        "shards": shard_meta,
    }
    (shards_dir / "manifest.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", "utf-8")
    report["instances"] = meta


_STAGE_FUNCS = {
    "stats": stage_stats,
    "filter": stage_filter,
    "vocab": stage_vocab,
    "instances": stage_instances,
}


def execute(run: PipelineRun) -> dict:
    """Run the configured stage prefix; returns (and writes) the run report."""
    manifest = load_manifest(run.manifest_path)
    out_dir = Path(run.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report: dict = {"stages": list(run.stages), "status": "ok"}
    for stage in run.stages:
        try:
            _STAGE_FUNCS[stage](run, manifest, report)
        except GaprepError as exc:
            report["status"] = "failed"
            report["failed_stage"] = stage
            report["error"] = str(exc)
            (out_dir / "run_report.json").write_text(
                json.dumps(report, indent=2, sort_keys=True) + "\n", "utf-8"
            )
            raise type(exc)(f"stage {stage!r} failed: {exc}") from exc
    (out_dir / "run_report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n", "utf-8"
    )
    return report


def with_seed(run: PipelineRun, seed: int) -> PipelineRun:
    return replace(run, gen_config=replace(run.gen_config, seed=seed))
