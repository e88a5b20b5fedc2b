import sys
from pathlib import Path

import pytest

from cosminer import ReferenceEmbedder, Vocabulary, load_vocab
from cosminer.cli import main as cli_main

DATA_DIR = Path(__file__).parent / "data"
GOLDEN_DIR = DATA_DIR / "golden"

FIXTURE_OUTCOMES = DATA_DIR / "fixture_outcomes.csv"
FIXTURE_VOCAB = DATA_DIR / "fixture_vocab.txt"
ATTENTION_EXAMPLE = DATA_DIR / "attention_example.json"

# The bundled fixture pipeline runs with this configuration everywhere.
FIXTURE_SEED = 42
FIXTURE_DIM = 32


@pytest.fixture
def toy_vocab() -> Vocabulary:
    return Vocabulary(["[PAD]", "[UNK]", "[CLS]", "[SEP]", "mortality", "rate", "co", "##vid"])


@pytest.fixture
def fixture_vocab() -> Vocabulary:
    return load_vocab(FIXTURE_VOCAB)


@pytest.fixture
def fixture_embedder() -> ReferenceEmbedder:
    return ReferenceEmbedder(FIXTURE_SEED, FIXTURE_DIM)


def run_cli(args, capsys=None):
    """Invoke the CLI in-process; returns (exit_code, stdout, stderr)."""
    code = cli_main([str(a) for a in args])
    if capsys is None:
        return code, "", ""
    captured = capsys.readouterr()
    return code, captured.out, captured.err
