"""Candidate core-outcome mining via Jaccard grouping within each class.

Within one assigned label, identical normalized texts collapse first
(keeping their total frequency), then distinct texts merge single-link:
any pair with Jaccard similarity at or above the threshold joins its two
texts' groups. A group is emitted only when its internal minimum pairwise
similarity still clears the threshold and its total frequency clears the
frequency floor, so chained-together groups whose extremes drifted apart
are dropped rather than reported as near-duplicates.
"""

from dataclasses import dataclass

import numpy as np

from .corpus import OutcomeRecord
from .classify import as_assignments
from .errors import EmptySetError


def token_set(text: str) -> frozenset[str]:
    """Space-split token set of a normalized text (duplicates collapse)."""
    return frozenset(text.split())


def jaccard(a, b) -> float:
    """|a n b| / |a u b| over token sets; undefined (error) on empty sets."""
    a, b = set(a), set(b)
    if not a or not b:
        raise EmptySetError("jaccard is undefined for empty token sets")
    return len(a & b) / len(a | b)


def pairwise_jaccard(token_sets) -> np.ndarray:
    """Symmetric unit-diagonal Jaccard matrix in input order."""
    sets = [set(s) for s in token_sets]
    n = len(sets)
    matrix = np.ones((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            matrix[i, j] = matrix[j, i] = jaccard(sets[i], sets[j])
    return matrix


@dataclass(frozen=True)
class CoreOutcomeCandidate:
    """A group of recurring near-identical outcomes under one label."""

    label: str
    representative_text: str
    frequency: int
    group_size: int
    group_min_jaccard: float
    member_ids: tuple[str, ...]
    texts: tuple[str, ...]


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


def mine_candidates(
    classifications,
    outcomes,
    tau: float = 0.5,
    min_freq: int = 2,
) -> dict[str, list[CoreOutcomeCandidate]]:
    """Mine candidate core outcomes per label.

    classifications may be RankedClassification objects or (id, label)
    pairs; outcomes supplies the normalized text per id. Returns a mapping
    from label to candidates sorted by descending group_min_jaccard, then
    descending frequency, then representative text. Output is independent
    of input ordering.
    """
    if tau < 0:
        raise ValueError("tau must be non-negative")
    if min_freq < 1:
        raise ValueError("min_freq must be >= 1")
    by_id: dict[str, OutcomeRecord] = {rec.id: rec for rec in outcomes}

    per_label: dict[str, dict[str, list[str]]] = {}
    for outcome_id, label in as_assignments(classifications):
        rec = by_id.get(outcome_id)
        if rec is None:
            raise KeyError(f"classified outcome {outcome_id!r} is not in the corpus")
        per_label.setdefault(label, {}).setdefault(rec.normalized_text, []).append(rec.id)

    result: dict[str, list[CoreOutcomeCandidate]] = {}
    for label in sorted(per_label):
        text_ids = per_label[label]
        texts = sorted(text_ids)
        sets = [token_set(t) for t in texts]
        uf = _UnionFind(len(texts))
        for i in range(len(texts)):
            for j in range(i + 1, len(texts)):
                if jaccard(sets[i], sets[j]) >= tau:
                    uf.union(i, j)

        groups: dict[int, list[int]] = {}
        for i in range(len(texts)):
            groups.setdefault(uf.find(i), []).append(i)

        candidates = []
        for indices in groups.values():
            frequency = sum(len(text_ids[texts[i]]) for i in indices)
            min_jac = 1.0
            for a in range(len(indices)):
                for b in range(a + 1, len(indices)):
                    min_jac = min(min_jac, jaccard(sets[indices[a]], sets[indices[b]]))
            if frequency < min_freq or min_jac < tau:
                continue
            member_texts = [texts[i] for i in indices]
            representative = min(
                member_texts,
                key=lambda t: (-len(text_ids[t]), t),
            )
            member_ids = sorted(
                outcome_id for t in member_texts for outcome_id in text_ids[t]
            )
            candidates.append(
                CoreOutcomeCandidate(
                    label=label,
                    representative_text=representative,
                    frequency=frequency,
                    group_size=len(member_texts),
                    group_min_jaccard=min_jac,
                    member_ids=tuple(member_ids),
                    texts=tuple(sorted(member_texts)),
                )
            )
        candidates.sort(
            key=lambda c: (-c.group_min_jaccard, -c.frequency, c.representative_text)
        )
        result[label] = candidates
    return result
