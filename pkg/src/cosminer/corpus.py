"""Outcome corpus ingestion: text normalization, file loading, taxonomies.

All downstream modules operate on the canonical normalized form produced
here: lowercase, alphanumeric tokens separated by single spaces. Rows that
cannot be normalized are reported as rejects with their file line number,
never silently dropped, so record + reject totals always account for every
data row.
"""

import csv
import re
from dataclasses import dataclass
from pathlib import Path

from .errors import EmptyOutcomeError, SchemaError, TaxonomyError

_NON_ALNUM = re.compile(r"[^a-z0-9]+")

SMITH15_LABELS = (
    "withdrawal treatment study",
    "activities daily living",
    "adverse events effects",
    "quality life",
    "satisfaction",
    "psychosocial",
    "physiological clinical",
    "mortality survival",
    "compliance",
    "operative",
    "pain",
    "economic",
    "hospital",
    "infection",
    "medication",
)

CORE5_LABELS = (
    "life impact",
    "resource use",
    "physiological clinical",
    "adverse events",
    "death",
)

BUILTIN_TAXONOMIES = {"smith15": SMITH15_LABELS, "core5": CORE5_LABELS}


def normalize_text(raw: str) -> str:
    """Normalize free text to lowercase space-separated alphanumeric tokens.

    Every character outside [a-z0-9] becomes a space, runs of spaces
    collapse to one, and the result is trimmed. Idempotent. Raises
    EmptyOutcomeError when nothing survives.
    """
    normalized = _NON_ALNUM.sub(" ", raw.lower()).strip()
    if not normalized:
        raise EmptyOutcomeError(f"text is empty after normalization: {raw!r}")
    return normalized


@dataclass(frozen=True)
class OutcomeRecord:
    """One outcome row: opaque id, original text, canonical normalized text."""

    id: str
    raw_text: str
    normalized_text: str
    study_id: str | None = None
    line: int | None = None


@dataclass(frozen=True)
class RejectedRow:
    """A data row that could not become a record, with its file line."""

    line: int
    id: str
    reason: str


@dataclass(frozen=True)
class TaxonomyDef:
    """Named, ordered label inventory; order is the classification tie-break."""

    name: str
    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.labels) < 2:
            raise TaxonomyError(f"taxonomy {self.name!r} needs at least 2 labels")
        if len(set(self.labels)) != len(self.labels):
            raise TaxonomyError(f"taxonomy {self.name!r} has duplicate labels")


def load_taxonomy(name_or_path: str | Path) -> TaxonomyDef:
    """Resolve a built-in taxonomy name or load one label per line from a file.

    File labels are normalized before the distinctness check; built-ins are
    stored pre-normalized.
    """
    key = str(name_or_path)
    if key in BUILTIN_TAXONOMIES:
        return TaxonomyDef(name=key, labels=BUILTIN_TAXONOMIES[key])
    path = Path(name_or_path)
    if not path.is_file():
        raise TaxonomyError(f"unknown taxonomy name or missing file: {key!r}")
    labels = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            labels.append(normalize_text(line))
        except EmptyOutcomeError:
            raise TaxonomyError(f"label at line {lineno} is empty after normalization")
    if len(set(labels)) != len(labels):
        raise TaxonomyError(f"duplicate labels after normalization in {path}")
    if len(labels) < 2:
        raise TaxonomyError(f"taxonomy file {path} has fewer than 2 labels")
    return TaxonomyDef(name=path.stem, labels=tuple(labels))


def load_outcomes(
    path: str | Path,
    fmt: str = "csv",
    id_col: str = "id",
    text_col: str = "title",
) -> tuple[list[OutcomeRecord], list[RejectedRow]]:
    """Load outcome records from a delimited export, preserving input order.

    fmt "csv": comma-delimited, fixed header columns id,outcome_text with an
    optional study_id. fmt "aact-pipe": pipe-delimited with the id and text
    column names supplied by the caller; a nct_id column, when present, is
    taken as the study id. Returns (records, rejects) where rejects carry
    the 1-based file line and a reason.
    """
    if fmt == "csv":
        delimiter, idc, tc, sc = ",", "id", "outcome_text", "study_id"
    elif fmt == "aact-pipe":
        delimiter, idc, tc, sc = "|", id_col, text_col, "nct_id"
    else:
        raise ValueError(f"unknown outcome format: {fmt!r}")

    records: list[OutcomeRecord] = []
    rejects: list[RejectedRow] = []
    seen_ids: set[str] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        header = next(reader, None)
        if header is None:
            raise SchemaError(f"{path}: missing header row")
        columns = {name: i for i, name in enumerate(header)}
        for required in (idc, tc):
            if required not in columns:
                raise SchemaError(f"{path}: missing required column {required!r}")
        id_idx, text_idx = columns[idc], columns[tc]
        study_idx = columns.get(sc)

        for row in reader:
            if not row:
                continue
            line = reader.line_num
            rec_id = row[id_idx].strip() if id_idx < len(row) else ""
            if not rec_id:
                rejects.append(RejectedRow(line, "", "missing id"))
                continue
            if rec_id in seen_ids:
                rejects.append(RejectedRow(line, rec_id, "duplicate id"))
                continue
            raw = row[text_idx] if text_idx < len(row) else ""
            try:
                normalized = normalize_text(raw)
            except EmptyOutcomeError:
                rejects.append(
                    RejectedRow(line, rec_id, "outcome text empty after normalization")
                )
                continue
            study = None
            if study_idx is not None and study_idx < len(row) and row[study_idx].strip():
                study = row[study_idx].strip()
            seen_ids.add(rec_id)
            records.append(
                OutcomeRecord(
                    id=rec_id,
                    raw_text=raw,
                    normalized_text=normalized,
                    study_id=study,
                    line=line,
                )
            )
    return records, rejects
