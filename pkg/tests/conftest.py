import collections
import json
from pathlib import Path

import pytest

from geezocr import _kernels
from geezocr.bpe import Vocabulary, bytes_to_unicode

FIXTURES = Path(__file__).parent / "fixtures"

ENGLISH = (
    "the quick brown fox jumps over the lazy dog while the other dogs sleep "
    "in the warm sun and the farmer watches them from the porch of the house "
    "there is nothing better than a quiet evening on the farm with the animals"
)


def train_merges(text, n_merges):
    """Tiny BPE trainer for building test vocabularies."""
    bmap = bytes_to_unicode()
    words = collections.Counter(
        tuple(bmap[b] for b in (" " + w if k else w).encode()) for k, w in enumerate(text.split())
    )
    merges = []
    for _ in range(n_merges):
        pairs = collections.Counter()
        for word, freq in words.items():
            for p in zip(word, word[1:]):
                pairs[p] += freq
        if not pairs:
            break
        best = max(sorted(pairs), key=pairs.get)
        merges.append(best)
        new_words = collections.Counter()
        for word, freq in words.items():
            out, i = [], 0
            while i < len(word):
                if i < len(word) - 1 and (word[i], word[i + 1]) == best:
                    out.append(word[i] + word[i + 1])
                    i += 2
                else:
                    out.append(word[i])
                    i += 1
            new_words[tuple(out)] += freq
        words = new_words
    return merges


def byte_vocab_dict():
    return {c: i for i, c in enumerate(bytes_to_unicode().values())}


@pytest.fixture(scope="session")
def byte_vocab():
    return Vocabulary(byte_vocab_dict())


@pytest.fixture(scope="session")
def english_vocab():
    merges = train_merges(ENGLISH, 120)
    token_to_id = byte_vocab_dict()
    for left, right in merges:
        token_to_id.setdefault(left + right, len(token_to_id))
    return Vocabulary(token_to_id, tuple(merges))


@pytest.fixture(scope="session")
def charset_230():
    return [line for line in (FIXTURES / "charset_230.txt").read_text("utf-8").splitlines() if line]


@pytest.fixture(scope="session")
def transcriptions_100():
    return (FIXTURES / "transcriptions_100.txt").read_text("utf-8").splitlines()


@pytest.fixture(scope="session")
def geez_vocab(english_vocab, charset_230):
    from geezocr.bpe import extend_vocab

    return extend_vocab(english_vocab, charset_230)


def filler_vocab_dict(size=50265):
    """Byte tokens padded with filler tokens up to ``size`` entries."""
    vocab = byte_vocab_dict()
    k = 0
    while len(vocab) < size:
        vocab.setdefault(f"tok{k}", len(vocab))
        k += 1
    return vocab


@pytest.fixture
def write_json(tmp_path):
    def _write(name, doc):
        path = tmp_path / name
        path.write_text(json.dumps(doc, ensure_ascii=False), encoding="utf-8")
        return path
    return _write


@pytest.fixture(params=["numba", "numpy"])
def kernel_backend(request, monkeypatch):
    if request.param == "numba" and not _kernels.HAVE_NUMBA:
        pytest.skip("numba not installed")
    monkeypatch.setattr(_kernels, "USE_NUMBA", request.param == "numba")
    return request.param


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
