"""Greedy longest-match word-piece tokenization over a file-loaded vocabulary.

The matcher repeatedly takes the longest vocabulary piece that prefixes the
remaining word (continuations carry a "##" prefix); any dead end makes the
whole word [UNK], with no backtracking. This mirrors the reference behaviour
of published BERT-family vocabularies so token splits are reproducible.
"""

from dataclasses import dataclass
from pathlib import Path

from .errors import EmptyCorpusError, VocabError

CLS_TOKEN = "[CLS]"
SEP_TOKEN = "[SEP]"
UNK_TOKEN = "[UNK]"
PAD_TOKEN = "[PAD]"

MAX_WORD_CHARS = 100


class Vocabulary:
    """Immutable piece inventory; a piece's id is its zero-based line index."""

    def __init__(self, pieces):
        pieces = tuple(pieces)
        index: dict[str, int] = {}
        for i, piece in enumerate(pieces):
            if not piece:
                raise VocabError(f"empty piece at line {i + 1}")
            if piece in index:
                raise VocabError(f"duplicate piece {piece!r} at line {i + 1}")
            index[piece] = i
        if UNK_TOKEN not in index:
            raise VocabError(f"vocabulary lacks required piece {UNK_TOKEN}")
        self.pieces = pieces
        self._index = index
        self.unk_id = index[UNK_TOKEN]
        self.cls_id = index.get(CLS_TOKEN)
        self.sep_id = index.get(SEP_TOKEN)
        self.pad_id = index.get(PAD_TOKEN)

    def __len__(self) -> int:
        return len(self.pieces)

    def __contains__(self, piece: str) -> bool:
        return piece in self._index

    def piece_id(self, piece: str) -> int:
        return self._index[piece]


def load_vocab(path: str | Path) -> Vocabulary:
    """Load a vocabulary file: UTF-8, one piece per line."""
    text = Path(path).read_text(encoding="utf-8")
    return Vocabulary(text.splitlines())


@dataclass(frozen=True)
class TokenSequence:
    """Tokenization result; word_spans index into pieces per source word."""

    pieces: tuple[str, ...]
    ids: tuple[int, ...]
    words: tuple[str, ...]
    word_spans: tuple[tuple[int, int], ...]
    specials_mask: tuple[bool, ...]


def _split_word(word: str, vocab: Vocabulary) -> list[str] | None:
    """Greedy longest-match split of one word; None means the word is [UNK]."""
    if len(word) > MAX_WORD_CHARS:
        return None
    out: list[str] = []
    start = 0
    while start < len(word):
        end = len(word)
        match = None
        while end > start:
            piece = word[start:end]
            if start > 0:
                piece = "##" + piece
            if piece in vocab:
                match = piece
                break
            end -= 1
        if match is None:
            return None
        out.append(match)
        start = end
    return out


def tokenize(text: str, vocab: Vocabulary, with_specials: bool = True) -> TokenSequence:
    """Tokenize normalized text; total for any input given a valid vocabulary."""
    words = text.split() if text else []
    pieces: list[str] = []
    ids: list[int] = []
    spans: list[tuple[int, int]] = []
    mask: list[bool] = []

    if with_specials:
        if vocab.cls_id is None or vocab.sep_id is None:
            raise VocabError("vocabulary lacks [CLS]/[SEP] but specials were requested")
        pieces.append(CLS_TOKEN)
        ids.append(vocab.cls_id)
        mask.append(True)

    for word in words:
        split = _split_word(word, vocab)
        if split is None:
            split = [UNK_TOKEN]
        start = len(pieces)
        for piece in split:
            pieces.append(piece)
            ids.append(vocab.piece_id(piece))
            mask.append(False)
        spans.append((start, len(pieces)))

    if with_specials:
        pieces.append(SEP_TOKEN)
        ids.append(vocab.sep_id)
        mask.append(True)

    return TokenSequence(
        pieces=tuple(pieces),
        ids=tuple(ids),
        words=tuple(words),
        word_spans=tuple(spans),
        specials_mask=tuple(mask),
    )


@dataclass(frozen=True)
class WordFragmentation:
    word: str
    count: int
    piece_count: int
    fragmented: bool


@dataclass(frozen=True)
class FragmentationReport:
    words: tuple[WordFragmentation, ...]
    fragmented_fraction: float


def fragmentation_report(corpus) -> FragmentationReport:
    """Per-word subword-fragmentation statistics over tokenized sequences.

    A word occurrence is fragmented when it split into more than one piece or
    regressed to [UNK]. Entries are sorted by descending piece count, then
    descending occurrence count, then word. The corpus-level fraction weights
    by occurrences. Assumes all sequences share one vocabulary.
    """
    sequences = list(corpus)
    if not sequences:
        raise EmptyCorpusError("fragmentation report requires a non-empty corpus")

    counts: dict[str, int] = {}
    piece_counts: dict[str, int] = {}
    fragmented: dict[str, bool] = {}
    total = 0
    fragmented_occurrences = 0
    for seq in sequences:
        for word, (a, b) in zip(seq.words, seq.word_spans):
            n_pieces = b - a
            is_frag = n_pieces > 1 or seq.pieces[a] == UNK_TOKEN
            counts[word] = counts.get(word, 0) + 1
            piece_counts.setdefault(word, n_pieces)
            fragmented.setdefault(word, is_frag)
            total += 1
            if is_frag:
                fragmented_occurrences += 1

    entries = tuple(
        sorted(
            (
                WordFragmentation(w, counts[w], piece_counts[w], fragmented[w])
                for w in counts
            ),
            key=lambda e: (-e.piece_count, -e.count, e.word),
        )
    )
    fraction = fragmented_occurrences / total if total else 0.0
    return FragmentationReport(words=entries, fragmented_fraction=fraction)
