"""Report artifact rendering and atomic file writes.

Every artifact is rendered fully in memory first and written through a
temp-then-rename step, so a failed run never leaves partial files behind.
Floats are serialized with repr (shortest round-trip form) to keep outputs
byte-stable across runs.
"""

import csv
import io
import json
import os
from pathlib import Path

CLASSIFICATION_HEADER = [
    "outcome_id",
    "assigned",
    "margin",
    "needs_review",
    "rank1_label",
    "rank1_sim",
    "rank2_label",
    "rank2_sim",
    "rank3_sim_label",
    "rank3_sim",
]
COUNTS_HEADER = ["label", "count"]
REJECTS_HEADER = ["line", "id", "reason"]
DISTANCES_HEADER = ["label", "count", "dist_mean_to_label"]
OUTLIERS_HEADER = ["label", "outcome_id", "dist_to_mean"]
CANDIDATES_HEADER = [
    "label",
    "representative_text",
    "frequency",
    "group_size",
    "group_min_jaccard",
    "member_ids",
]
FRAGMENTATION_HEADER = ["word", "count", "piece_count", "fragmented"]
ATTENTION_PROFILE_HEADER = ["sequence", "position", "token", "weight", "is_sep"]
ATTENTION_SUMMARY_HEADER = ["sequence", "sep_share", "noop"]


def fmt_float(x) -> str:
    return repr(float(x))


def fmt_bool(b) -> str:
    return "true" if b else "false"


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def write_text_atomic(path: Path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + f".tmp{os.getpid()}")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def classification_rows(classifications) -> list[list[str]]:
    rows = []
    for c in classifications:
        row = [c.outcome_id, c.assigned, fmt_float(c.margin), fmt_bool(c.needs_review)]
        for rank in range(3):
            if rank < len(c.ranked):
                label, sim = c.ranked[rank]
                row.extend([label, fmt_float(sim)])
            else:
                row.extend(["", ""])
        rows.append(row)
    return rows


def counts_rows(counts: dict, labels) -> list[list[str]]:
    return [[label, str(counts.get(label, 0))] for label in labels]


def rejects_rows(load_rejects, classification_rejects) -> list[list[str]]:
    rows = []
    for r in load_rejects:
        rows.append((r.line, r.id, r.reason))
    for r in classification_rejects:
        line = r.record.line if r.record.line is not None else 0
        rows.append((line, r.record.id, r.reason))
    rows.sort(key=lambda item: (item[0], item[1]))
    return [[str(line), rec_id, reason] for line, rec_id, reason in rows]


def distances_rows(stats) -> list[list[str]]:
    return [
        [s.label, str(s.member_count), fmt_float(s.dist_mean_to_label)]
        for s in stats
        if s.member_count > 0
    ]


def outliers_rows(per_label) -> list[list[str]]:
    rows = []
    for label, scored in per_label:
        for outcome_id, dist in scored:
            rows.append([label, outcome_id, fmt_float(dist)])
    return rows


def projection_rows(ids, coords, assigned) -> list[list[str]]:
    rows = []
    for outcome_id, point, label in zip(ids, coords, assigned):
        rows.append([outcome_id] + [fmt_float(x) for x in point] + [label])
    return rows


def projection_header(k: int) -> list[str]:
    axes = ["x", "y", "z"][:k]
    return ["id"] + axes + ["assigned_label"]


def candidates_rows(per_label: dict, labels) -> list[list[str]]:
    rows = []
    for label in labels:
        for c in per_label.get(label, []):
            rows.append(
                [
                    c.label,
                    c.representative_text,
                    str(c.frequency),
                    str(c.group_size),
                    fmt_float(c.group_min_jaccard),
                    ";".join(c.member_ids),
                ]
            )
    return rows


def fragmentation_rows(report) -> list[list[str]]:
    return [
        [w.word, str(w.count), str(w.piece_count), fmt_bool(w.fragmented)]
        for w in report.words
    ]


def attention_profile_rows(profiles) -> list[list[str]]:
    rows = []
    for seq_index, profile in enumerate(profiles):
        for pos, (token, weight) in enumerate(zip(profile.tokens, profile.weights)):
            rows.append(
                [
                    str(seq_index),
                    str(pos),
                    token,
                    fmt_float(weight),
                    fmt_bool(token == "[SEP]"),
                ]
            )
    return rows


def attention_summary_rows(profiles) -> list[list[str]]:
    return [
        [str(i), fmt_float(p.sep_share), fmt_bool(p.noop_flag)]
        for i, p in enumerate(profiles)
    ]


def rankings_json(classifications) -> str:
    """Full-ranking sidecar for consumers that need ranks beyond 3."""
    payload = [
        {
            "outcome_id": c.outcome_id,
            "assigned": c.assigned,
            "margin": c.margin,
            "needs_review": c.needs_review,
            "ranked": [[label, sim] for label, sim in c.ranked],
        }
        for c in classifications
    ]
    return json.dumps(payload, indent=2) + "\n"
