"""Embedding providers and pooling.

Two interchangeable vector providers exist: a TSV-backed store carrying
externally computed vectors (keyed by token piece or by full normalized
text), and a seeded reference embedder that derives a unit vector for any
piece id from a splitmix64 stream. The reference path makes every pipeline
stage runnable and bit-reproducible without any model, on any platform.
"""

import math
from pathlib import Path

import numpy as np

from .errors import (
    DimensionError,
    EmptyOutcomeError,
    EmptyPoolError,
    MissingEmbeddingError,
    StoreFormatError,
    ZeroVectorError,
)
from .validation import as_float_matrix, as_float_vector
from .wordpiece import Vocabulary, tokenize

DEFAULT_DIM = 1024

_MASK64 = (1 << 64) - 1
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_TWO63 = 1 << 63


def _splitmix64(state: int) -> tuple[int, int]:
    """One splitmix64 step: returns (advanced state, 64-bit output)."""
    state = (state + _GOLDEN_GAMMA) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    z = z ^ (z >> 31)
    return state, z


def reference_embed(token_id: int, seed: int, dim: int) -> np.ndarray:
    """Deterministic unit vector for (token_id, seed, dim).

    The stream state starts at seed XOR (token_id * golden gamma); each of
    the dim draws maps the unsigned 64-bit output u to u/2^63 - 1 in
    [-1, 1), and the result is L2-normalized. Pure integer/float64
    arithmetic, so identical bits on every platform.
    """
    if dim < 1:
        raise DimensionError(f"embedding dim must be >= 1, got {dim}")
    state = (seed ^ ((token_id * _GOLDEN_GAMMA) & _MASK64)) & _MASK64
    values = np.empty(dim, dtype=np.float64)
    for i in range(dim):
        state, out = _splitmix64(state)
        values[i] = out / _TWO63 - 1.0
    norm = math.sqrt(float(np.sum(values * values)))
    if norm == 0.0:
        raise ZeroVectorError(f"all-zero draw for token_id={token_id}, seed={seed}")
    values /= norm
    values.flags.writeable = False
    return values


class EmbeddingStore:
    """Immutable mapping from key (piece or full text) to a fixed-dim vector."""

    def __init__(self, dim: int, entries: dict | None = None):
        if dim < 1:
            raise DimensionError(f"store dim must be >= 1, got {dim}")
        self.dim = dim
        self._entries: dict[str, np.ndarray] = {}
        for key, vec in (entries or {}).items():
            self.add(key, vec)

    def add(self, key: str, vec) -> None:
        if "\t" in key:
            raise StoreFormatError(f"store keys must not contain tabs: {key!r}")
        if key in self._entries:
            raise StoreFormatError(f"duplicate store key {key!r}")
        arr = as_float_vector(vec, name=f"vector for {key!r}")
        if arr.shape[0] != self.dim:
            raise StoreFormatError(
                f"vector for {key!r} has {arr.shape[0]} values, expected {self.dim}"
            )
        arr = arr.copy()
        arr.flags.writeable = False
        self._entries[key] = arr

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: str) -> bool:
        return key in self._entries

    def keys(self):
        return self._entries.keys()

    def text_vector(self, text: str) -> np.ndarray | None:
        """Full-text lookup; None when the text is not a store key."""
        return self._entries.get(text)

    def piece_vector(self, piece: str, piece_id: int) -> np.ndarray:
        """Per-piece lookup; a missing piece is an error, never silent."""
        vec = self._entries.get(piece)
        if vec is None:
            raise MissingEmbeddingError(piece)
        return vec


class ReferenceEmbedder:
    """Provider deriving piece vectors from reference_embed, cached by id."""

    def __init__(self, seed: int, dim: int = DEFAULT_DIM):
        if not 0 <= seed <= _MASK64:
            raise ValueError(f"seed must fit in 64 bits, got {seed}")
        if dim < 1:
            raise DimensionError(f"embedding dim must be >= 1, got {dim}")
        self.seed = seed
        self.dim = dim
        self._cache: dict[int, np.ndarray] = {}

    def text_vector(self, text: str) -> None:
        return None

    def piece_vector(self, piece: str, piece_id: int) -> np.ndarray:
        vec = self._cache.get(piece_id)
        if vec is None:
            vec = reference_embed(piece_id, self.seed, self.dim)
            self._cache[piece_id] = vec
        return vec


def load_store(path: str | Path) -> EmbeddingStore:
    """Load an embedding store TSV.

    Line 1 is `dim<TAB>D<TAB>n<TAB>N`; each of the N following lines is
    `key<TAB>v1<TAB>...<TAB>vD`. Any malformed row, duplicate key,
    non-finite value, or count mismatch is a StoreFormatError.
    """
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise StoreFormatError(f"{path}: empty store file")
    header = lines[0].split("\t")
    if len(header) != 4 or header[0] != "dim" or header[2] != "n":
        raise StoreFormatError(f"{path}: bad header {lines[0]!r}")
    try:
        dim, count = int(header[1]), int(header[3])
    except ValueError:
        raise StoreFormatError(f"{path}: non-integer header fields {lines[0]!r}")
    store = EmbeddingStore(dim)
    for lineno, line in enumerate(lines[1:], 2):
        fields = line.split("\t")
        if len(fields) != dim + 1:
            raise StoreFormatError(
                f"{path}:{lineno}: expected {dim} values, got {len(fields) - 1}"
            )
        key = fields[0]
        try:
            values = [float(f) for f in fields[1:]]
        except ValueError:
            raise StoreFormatError(f"{path}:{lineno}: non-numeric field")
        if not all(math.isfinite(v) for v in values):
            raise StoreFormatError(f"{path}:{lineno}: non-finite value")
        store.add(key, values)
    if len(store) != count:
        raise StoreFormatError(
            f"{path}: header declares {count} entries, found {len(store)}"
        )
    return store


def save_store(store: EmbeddingStore, path: str | Path) -> None:
    """Write a store in the TSV format, 9 significant digits per value."""
    lines = [f"dim\t{store.dim}\tn\t{len(store)}"]
    for key in store.keys():
        vec = store.text_vector(key)
        lines.append(key + "\t" + "\t".join(f"{v:.9g}" for v in vec))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def pool(vectors, method: str = "median") -> np.ndarray:
    """Collapse same-dim vectors to one by coordinate-wise median or mean.

    The even-count median is the arithmetic mean of the two middle order
    statistics, matching np.median. A pre-stacked 2-D array is accepted and
    validated in one pass; the one- and two-row shortcuts are bit-identical
    to np.median.
    """
    if method not in ("median", "mean"):
        raise ValueError(f"unknown pooling method {method!r}")
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        stack = as_float_matrix(vectors)
    else:
        vecs = [as_float_vector(v) for v in vectors]
        if not vecs:
            raise EmptyPoolError("cannot pool an empty sequence of vectors")
        dims = {v.shape[0] for v in vecs}
        if len(dims) != 1:
            raise DimensionError(f"mixed dims in pool input: {sorted(dims)}")
        stack = np.asarray(vecs)
    n = stack.shape[0]
    if n == 0:
        raise EmptyPoolError("cannot pool an empty sequence of vectors")
    if method == "mean":
        return np.mean(stack, axis=0)
    if n == 1:
        return stack[0].copy()
    if n == 2:
        return (stack[0] + stack[1]) * 0.5
    return np.median(stack, axis=0)


def embed_text(text: str, vocab: Vocabulary, provider, method: str = "median") -> np.ndarray:
    """Embed one normalized text via the provider.

    A full-text store key wins outright (exact replay of precomputed
    sentence vectors); otherwise the text is tokenized without specials and
    the per-piece vectors are pooled.
    """
    if not text:
        raise EmptyOutcomeError("cannot embed empty text")
    full = provider.text_vector(text)
    if full is not None:
        return full
    seq = tokenize(text, vocab, with_specials=False)
    vectors = [provider.piece_vector(p, i) for p, i in zip(seq.pieces, seq.ids)]
    return pool(np.asarray(vectors), method=method)
