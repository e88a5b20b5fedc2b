"""Command-line driver: classify, analyze, mine, attention, fragmentation.

All configuration comes from explicit flags (no environment variables).
Each command validates its full configuration before doing any work, and
writes output files atomically only after every artifact has been
rendered, so identical inputs and flags always produce byte-identical
files and failures leave the output directory untouched.
"""

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import reports
from .classify import classify_corpus, build_label_embeddings
from .cluster import attention_cls_profile, cluster_stats, outlier_scores, pca_project
from .corpus import load_outcomes, load_taxonomy
from .embedding import (
    DEFAULT_DIM,
    EmbeddingStore,
    ReferenceEmbedder,
    embed_text,
    load_store,
)
from .errors import CosminerError, EmptyCorpusError
from .mining import mine_candidates
from .wordpiece import fragmentation_report, load_vocab, tokenize


@dataclass
class RunConfig:
    """Resolved, validated configuration for one command invocation."""

    input: Path | None = None
    fmt: str = "csv"
    id_col: str = "id"
    text_col: str = "title"
    taxonomy: str = "smith15"
    vocab_path: Path | None = None
    embeddings_path: Path | None = None
    reference_seed: int | None = None
    dim: int = DEFAULT_DIM
    pooling: str = "median"
    review_margin: float = 0.005
    tau: float = 0.5
    min_freq: int = 2
    out: Path = Path(".")


def _require_file(path: Path, what: str) -> Path:
    path = Path(path)
    if not path.is_file():
        raise CosminerError(f"{what} not found: {path}")
    return path


def _build_provider(cfg: RunConfig):
    """Vocabulary + embedding provider from validated config."""
    vocab = load_vocab(_require_file(cfg.vocab_path, "vocabulary file"))
    if cfg.embeddings_path is not None:
        store = load_store(_require_file(cfg.embeddings_path, "embedding store"))
        if cfg.dim != DEFAULT_DIM and store.dim != cfg.dim:
            raise CosminerError(
                f"--dim {cfg.dim} conflicts with store dim {store.dim}"
            )
        return vocab, store
    return vocab, ReferenceEmbedder(cfg.reference_seed, cfg.dim)


def _load_corpus(cfg: RunConfig):
    records, rejects = load_outcomes(
        _require_file(cfg.input, "input file"),
        fmt=cfg.fmt,
        id_col=cfg.id_col,
        text_col=cfg.text_col,
    )
    return records, rejects


def _config_from(args, **overrides) -> RunConfig:
    cfg = RunConfig(
        input=Path(args.input) if getattr(args, "input", None) else None,
        fmt=getattr(args, "format", "csv"),
        id_col=getattr(args, "id_col", "id"),
        text_col=getattr(args, "text_col", "title"),
        taxonomy=getattr(args, "taxonomy", "smith15"),
        vocab_path=Path(args.vocab) if getattr(args, "vocab", None) else None,
        embeddings_path=Path(args.embeddings) if getattr(args, "embeddings", None) else None,
        reference_seed=getattr(args, "reference_seed", None),
        dim=getattr(args, "dim", DEFAULT_DIM),
        pooling=getattr(args, "pool", "median"),
        review_margin=getattr(args, "review_margin", 0.005),
        tau=getattr(args, "tau", 0.5),
        min_freq=getattr(args, "min_freq", 2),
        out=Path(args.out),
    )
    for key, value in overrides.items():
        setattr(cfg, key, value)
    if cfg.dim < 1:
        raise CosminerError(f"--dim must be >= 1, got {cfg.dim}")
    if cfg.review_margin < 0:
        raise CosminerError("--review-margin must be non-negative")
    if cfg.tau < 0:
        raise CosminerError("--tau must be non-negative")
    if cfg.min_freq < 1:
        raise CosminerError("--min-freq must be >= 1")
    if cfg.reference_seed is not None and not 0 <= cfg.reference_seed < 2**64:
        raise CosminerError("--reference-seed must fit in 64 bits")
    return cfg


def _read_classifications_csv(path: Path) -> list[tuple[str, str]]:
    import csv as _csv

    path = _require_file(path, "classification file")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = _csv.DictReader(fh)
        if reader.fieldnames is None or not {"outcome_id", "assigned"} <= set(reader.fieldnames):
            raise CosminerError(f"{path}: not a classification file (missing columns)")
        return [(row["outcome_id"], row["assigned"]) for row in reader]


def cmd_classify(args) -> int:
    cfg = _config_from(args)
    taxonomy = load_taxonomy(cfg.taxonomy)
    vocab, provider = _build_provider(cfg)
    records, load_rejects = _load_corpus(cfg)
    if not records:
        raise EmptyCorpusError("no outcomes")

    result = classify_corpus(
        records,
        taxonomy,
        vocab,
        provider,
        method=cfg.pooling,
        review_margin=cfg.review_margin,
    )

    artifacts = {
        "classifications.csv": reports.render_csv(
            reports.CLASSIFICATION_HEADER,
            reports.classification_rows(result.classifications),
        ),
        "counts.csv": reports.render_csv(
            reports.COUNTS_HEADER, reports.counts_rows(result.counts, taxonomy.labels)
        ),
        "rejects.csv": reports.render_csv(
            reports.REJECTS_HEADER,
            reports.rejects_rows(load_rejects, result.rejects),
        ),
    }
    if args.full_rankings:
        artifacts["rankings.json"] = reports.rankings_json(result.classifications)

    cfg.out.mkdir(parents=True, exist_ok=True)
    for name, text in artifacts.items():
        reports.write_text_atomic(cfg.out / name, text)
    n_rejects = len(load_rejects) + len(result.rejects)
    print(
        f"classified {len(result.classifications)} outcomes "
        f"({n_rejects} rejected) under {taxonomy.name}; wrote {len(artifacts)} files to {cfg.out}"
    )
    return 0


def cmd_analyze(args) -> int:
    cfg = _config_from(args)
    taxonomy = load_taxonomy(cfg.taxonomy)
    vocab, provider = _build_provider(cfg)
    classifications_path = (
        Path(args.classifications) if args.classifications else cfg.out / "classifications.csv"
    )
    assignments = _read_classifications_csv(classifications_path)
    records, _ = _load_corpus(cfg)
    by_id = {rec.id: rec for rec in records}

    embeddings = {}
    for outcome_id, _label in assignments:
        rec = by_id.get(outcome_id)
        if rec is None:
            raise CosminerError(
                f"classified outcome {outcome_id!r} is not present in {cfg.input}"
            )
        embeddings[outcome_id] = embed_text(
            rec.normalized_text, vocab, provider, method=cfg.pooling
        )

    label_set = build_label_embeddings(taxonomy, vocab, provider, method=cfg.pooling)
    stats = cluster_stats(assignments, embeddings, label_set)

    means = {s.label: s.mean_vec for s in stats if s.member_count > 0}
    per_label_outliers = []
    for label in taxonomy.labels:
        members = [(i, embeddings[i]) for i, lab in assignments if lab == label]
        if members:
            per_label_outliers.append((label, outlier_scores(members, means[label])))

    ids = [outcome_id for outcome_id, _ in assignments]
    coords = pca_project([embeddings[i] for i in ids], k=args.project_k)
    assigned = [label for _, label in assignments]

    artifacts = {
        "distances.csv": reports.render_csv(
            reports.DISTANCES_HEADER, reports.distances_rows(stats)
        ),
        "outliers.csv": reports.render_csv(
            reports.OUTLIERS_HEADER, reports.outliers_rows(per_label_outliers)
        ),
        "projection.csv": reports.render_csv(
            reports.projection_header(args.project_k),
            reports.projection_rows(ids, coords, assigned),
        ),
    }
    cfg.out.mkdir(parents=True, exist_ok=True)
    for name, text in artifacts.items():
        reports.write_text_atomic(cfg.out / name, text)
    print(
        f"analyzed {len(assignments)} classified outcomes over {taxonomy.name}; "
        f"wrote {len(artifacts)} files to {cfg.out}"
    )
    return 0


def cmd_mine(args) -> int:
    cfg = _config_from(args)
    taxonomy = load_taxonomy(cfg.taxonomy)
    classifications_path = (
        Path(args.classifications) if args.classifications else cfg.out / "classifications.csv"
    )
    assignments = _read_classifications_csv(classifications_path)
    records, _ = _load_corpus(cfg)

    per_label = mine_candidates(assignments, records, tau=cfg.tau, min_freq=cfg.min_freq)
    text = reports.render_csv(
        reports.CANDIDATES_HEADER, reports.candidates_rows(per_label, taxonomy.labels)
    )
    cfg.out.mkdir(parents=True, exist_ok=True)
    reports.write_text_atomic(cfg.out / "candidates.csv", text)
    total = sum(len(v) for v in per_label.values())
    print(f"mined {total} candidate groups (tau={cfg.tau}, min_freq={cfg.min_freq})")
    return 0


def cmd_attention(args) -> int:
    path = _require_file(Path(args.input), "attention JSON")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CosminerError(f"{path}: invalid JSON ({exc})")
    documents = payload if isinstance(payload, list) else [payload]

    profiles = []
    for i, doc in enumerate(documents):
        if not isinstance(doc, dict) or "tokens" not in doc or "attention" not in doc:
            raise CosminerError(
                f"{path}: document {i} must be an object with 'tokens' and 'attention'"
            )
        profiles.append(
            attention_cls_profile(doc["attention"], doc["tokens"], args.noop_threshold)
        )

    out = Path(args.out)
    artifacts = {
        "attention_profiles.csv": reports.render_csv(
            reports.ATTENTION_PROFILE_HEADER, reports.attention_profile_rows(profiles)
        ),
        "attention_summary.csv": reports.render_csv(
            reports.ATTENTION_SUMMARY_HEADER, reports.attention_summary_rows(profiles)
        ),
    }
    out.mkdir(parents=True, exist_ok=True)
    for name, text in artifacts.items():
        reports.write_text_atomic(out / name, text)
    noop = sum(1 for p in profiles if p.noop_flag)
    fraction = noop / len(profiles)
    print(f"no-op sequences: {noop}/{len(profiles)} = {fraction!r}")
    return 0


def cmd_fragmentation(args) -> int:
    cfg = _config_from(args)
    vocab = load_vocab(_require_file(cfg.vocab_path, "vocabulary file"))
    records, _ = _load_corpus(cfg)
    if not records:
        raise EmptyCorpusError("no outcomes")
    sequences = [
        tokenize(rec.normalized_text, vocab, with_specials=False) for rec in records
    ]
    report = fragmentation_report(sequences)
    text = reports.render_csv(
        reports.FRAGMENTATION_HEADER, reports.fragmentation_rows(report)
    )
    cfg.out.mkdir(parents=True, exist_ok=True)
    reports.write_text_atomic(cfg.out / "fragmentation.csv", text)
    print(f"fragmented occurrence fraction: {report.fragmented_fraction!r}")
    return 0


def _add_corpus_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", required=True, help="outcomes export file")
    parser.add_argument(
        "--format", choices=["csv", "aact-pipe"], default="csv", help="input format"
    )
    parser.add_argument("--id-col", default="id", help="id column (aact-pipe only)")
    parser.add_argument(
        "--text-col", default="title", help="outcome text column (aact-pipe only)"
    )


def _add_provider_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--vocab", required=True, help="word-piece vocabulary file")
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--embeddings", help="embedding store TSV")
    group.add_argument(
        "--reference-seed", type=int, help="seed for the deterministic reference embedder"
    )
    parser.add_argument(
        "--dim", type=int, default=DEFAULT_DIM, help="embedding dimension (reference embedder)"
    )
    parser.add_argument("--pool", choices=["median", "mean"], default="median")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cosminer",
        description=(
            "Classify clinical-trial outcome text into fixed taxonomies by "
            "embedding cosine similarity, analyze the clusters, and mine "
            "candidate core outcomes."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="classify outcomes and write count reports")
    _add_corpus_flags(p)
    p.add_argument("--taxonomy", default="smith15", help="smith15, core5, or a label file")
    _add_provider_flags(p)
    p.add_argument("--review-margin", type=float, default=0.005)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument(
        "--full-rankings", action="store_true", help="also write a rankings.json sidecar"
    )
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("analyze", help="cluster stats, outliers, PCA projection")
    _add_corpus_flags(p)
    p.add_argument("--taxonomy", default="smith15")
    _add_provider_flags(p)
    p.add_argument(
        "--classifications",
        help="classification CSV from classify (default: <out>/classifications.csv)",
    )
    p.add_argument("--project-k", type=int, choices=[2, 3], default=2)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("mine", help="mine candidate core outcomes per label")
    _add_corpus_flags(p)
    p.add_argument("--taxonomy", default="smith15")
    p.add_argument(
        "--classifications",
        help="classification CSV from classify (default: <out>/classifications.csv)",
    )
    p.add_argument("--tau", type=float, default=0.5, help="Jaccard grouping threshold")
    p.add_argument("--min-freq", type=int, default=2, help="minimum group frequency")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("attention", help="[CLS] attention profiles and no-op flags")
    p.add_argument("--input", required=True, help="attention JSON document or list")
    p.add_argument("--noop-threshold", type=float, default=0.5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_attention)

    p = sub.add_parser("fragmentation", help="per-word subword fragmentation report")
    _add_corpus_flags(p)
    p.add_argument("--vocab", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fragmentation)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CosminerError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
