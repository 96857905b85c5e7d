"""Byte-level BPE vocabulary with atomic added tokens.

Base tokens are strings over the printable byte alphabet produced by
:func:`bytes_to_unicode`, the same convention the published RoBERTa/GPT-2
``vocab.json`` files use. Tokens appended by :func:`extend_vocab` are
literal characters that bypass byte mapping: any character in
``added_tokens`` encodes to exactly one id.

Pre-tokenization is deliberately simpler than the upstream regex: a chunk
is a maximal run of non-space characters optionally preceded by one space,
and merges never cross chunk boundaries.
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .exceptions import InvalidUtf8, MissingByteToken, UnknownId, VocabularyError

DEFAULT_MARKER = "Ġ"  # Ġ

_CHUNK_RE = re.compile(r" ?[^ ]+| +(?![^ ])| +")


@lru_cache(maxsize=1)
def bytes_to_unicode() -> dict[int, str]:
    """Map each byte to a printable character.

    Printable Latin-1 bytes map to themselves; the other 68 bytes take
    consecutive codepoints from U+0100, so byte 0x20 becomes U+0120.
    """
    printable = (
        list(range(ord("!"), ord("~") + 1))
        + list(range(ord("¡"), ord("¬") + 1))
        + list(range(ord("®"), ord("ÿ") + 1))
    )
    mapping = {b: chr(b) for b in printable}
    n = 0
    for b in range(256):
        if b not in mapping:
            mapping[b] = chr(256 + n)
            n += 1
    return mapping


@lru_cache(maxsize=1)
def unicode_to_bytes() -> dict[str, int]:
    return {c: b for b, c in bytes_to_unicode().items()}


def pretokenize(run: str) -> list[str]:
    return _CHUNK_RE.findall(run)


@dataclass(frozen=True, eq=False)
class Vocabulary:
    token_to_id: Mapping[str, int]
    merges: tuple[tuple[str, str], ...] = ()
    added_tokens: tuple[str, ...] = ()
    space_marker: str = DEFAULT_MARKER
    id_to_token: dict[int, str] = field(init=False, repr=False)
    added_set: frozenset[str] = field(init=False, repr=False)
    _ranks: dict[tuple[str, str], int] = field(init=False, repr=False)

    def __post_init__(self):
        id_to_token = {i: t for t, i in self.token_to_id.items()}
        if len(id_to_token) != len(self.token_to_id):
            raise VocabularyError("vocabulary maps two tokens to the same id")
        if id_to_token and (min(id_to_token) < 0 or max(id_to_token) != len(id_to_token) - 1):
            raise VocabularyError("vocabulary ids are not dense in [0, size)")
        base = self.base_size
        for tok in self.added_tokens:
            tid = self.token_to_id.get(tok)
            if tid is None or tid < base:
                raise VocabularyError(f"added token {tok!r} has id {tid}, below base size {base}")
        object.__setattr__(self, "id_to_token", id_to_token)
        object.__setattr__(self, "added_set", frozenset(self.added_tokens))
        object.__setattr__(
            self, "_ranks", {pair: r for r, pair in reversed(list(enumerate(self.merges)))}
        )

    @property
    def size(self) -> int:
        return len(self.token_to_id)

    @property
    def base_size(self) -> int:
        return len(self.token_to_id) - len(self.added_tokens)

    @property
    def byte_map(self) -> dict[int, str]:
        return bytes_to_unicode()

    def __eq__(self, other):
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return (
            dict(self.token_to_id) == dict(other.token_to_id)
            and self.merges == other.merges
            and self.added_tokens == other.added_tokens
            and self.space_marker == other.space_marker
        )

    __hash__ = None

    @classmethod
    def from_files(cls, vocab_path, merges_path=None, added_tokens_path=None,
                   marker: str = DEFAULT_MARKER) -> Vocabulary:
        token_to_id = load_vocab_json(vocab_path)
        merges = tuple(load_merges(merges_path)) if merges_path else ()
        added: list[str] = []
        if added_tokens_path:
            for entry in load_added_tokens(added_tokens_path):
                content, tid = entry["content"], entry["id"]
                existing = token_to_id.get(content)
                if existing is not None and existing != tid:
                    raise VocabularyError(
                        f"added token {content!r} has id {tid} but vocabulary says {existing}"
                    )
                if tid != len(token_to_id) and existing is None:
                    raise VocabularyError(
                        f"added token {content!r} has id {tid}, expected {len(token_to_id)}"
                    )
                token_to_id[content] = tid
                added.append(content)
        return cls(token_to_id, merges, tuple(added), marker)


def load_vocab_json(path) -> dict[str, int]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise VocabularyError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(doc, dict) or not all(
        isinstance(k, str) and isinstance(v, int) and not isinstance(v, bool)
        for k, v in doc.items()
    ):
        raise VocabularyError(f"{path}: expected an object mapping token -> integer id")
    return dict(doc)


def load_merges(path) -> list[tuple[str, str]]:
    merges = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split(" ")
            if len(parts) != 2 or not all(parts):
                raise VocabularyError(f"{path}:{lineno}: expected 'left right', got {line!r}")
            merges.append((parts[0], parts[1]))
    return merges


def load_added_tokens(path) -> list[dict]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise VocabularyError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(doc, list) or not all(
        isinstance(e, dict) and isinstance(e.get("content"), str) and isinstance(e.get("id"), int)
        for e in doc
    ):
        raise VocabularyError(f"{path}: expected a list of {{content, id}} objects")
    return doc


def added_tokens_doc(vocab: Vocabulary) -> list[dict]:
    return [{"content": t, "id": vocab.token_to_id[t]} for t in vocab.added_tokens]


def extract_charset(transcriptions: Iterable[str], *, non_ascii_only: bool = False,
                    normalize: str | None = None,
                    exclude_vocab: Vocabulary | None = None) -> list[str]:
    """Unique characters across ``transcriptions``, sorted by codepoint.

    ``exclude_vocab`` drops characters that already exist as a single token
    in that vocabulary (either a literal added token or a one-byte base
    token).
    """
    chars: set[str] = set()
    for text in transcriptions:
        if normalize:
            text = unicodedata.normalize(normalize, text)
        chars.update(text)
    if non_ascii_only:
        chars = {c for c in chars if ord(c) >= 0x80}
    if exclude_vocab is not None:
        chars = {c for c in chars if not _is_single_token(exclude_vocab, c)}
    return sorted(chars)


def _is_single_token(vocab: Vocabulary, c: str) -> bool:
    if c in vocab.token_to_id and c in vocab.added_set:
        return True
    mapped = "".join(bytes_to_unicode()[b] for b in c.encode("utf-8"))
    return mapped in vocab.token_to_id


def extend_vocab(base: Vocabulary, charset: Iterable[str]) -> Vocabulary:
    """Append every character of ``charset`` that is not yet a token.

    Returns a new vocabulary; ``base`` is left untouched.
    """
    token_to_id = dict(base.token_to_id)
    added = list(base.added_tokens)
    for c in charset:
        if c in token_to_id:
            continue
        token_to_id[c] = len(token_to_id)
        added.append(c)
    if len(added) == len(base.added_tokens):
        return base
    return Vocabulary(token_to_id, base.merges, tuple(added), base.space_marker)


def _bpe(vocab: Vocabulary, symbols: list[str]) -> list[str]:
    ranks = vocab._ranks
    while len(symbols) > 1:
        best_rank = None
        for i in range(len(symbols) - 1):
            r = ranks.get((symbols[i], symbols[i + 1]))
            if r is not None and (best_rank is None or r < best_rank):
                best_rank = r
        if best_rank is None:
            break
        left, right = vocab.merges[best_rank]
        merged = []
        i = 0
        # Merge every occurrence left to right, as repeated leftmost-first application would.
        while i < len(symbols):
            if i < len(symbols) - 1 and symbols[i] == left and symbols[i + 1] == right:
                merged.append(left + right)
                i += 2
            else:
                merged.append(symbols[i])
                i += 1
        symbols = merged
    return symbols


def _encode_chunk(vocab: Vocabulary, chunk: str, out: list[int]) -> None:
    bmap = bytes_to_unicode()
    symbols = [bmap[b] for b in chunk.encode("utf-8")]
    for sym in _bpe(vocab, symbols):
        tid = vocab.token_to_id.get(sym)
        if tid is not None:
            out.append(tid)
            continue
        # A merge produced a string the vocabulary lacks; fall back to its bytes.
        for c in sym:
            tid = vocab.token_to_id.get(c)
            if tid is None:
                raise MissingByteToken(
                    f"byte symbol {c!r} (0x{unicode_to_bytes()[c]:02x}) has no vocabulary entry"
                )
            out.append(tid)


def encode(vocab: Vocabulary, text: str) -> list[int]:
    ids: list[int] = []
    added = vocab.added_set
    run_start = 0
    for i, c in enumerate(text):
        if c in added:
            if run_start < i:
                for chunk in pretokenize(text[run_start:i]):
                    _encode_chunk(vocab, chunk, ids)
            ids.append(vocab.token_to_id[c])
            run_start = i + 1
    if run_start < len(text):
        for chunk in pretokenize(text[run_start:]):
            _encode_chunk(vocab, chunk, ids)
    return ids


def decode(vocab: Vocabulary, ids: Sequence[int]) -> str:
    ubytes = unicode_to_bytes()
    added = vocab.added_set
    parts: list[str] = []
    pending = bytearray()

    def flush():
        if pending:
            try:
                parts.append(pending.decode("utf-8"))
            except UnicodeDecodeError as exc:
                raise InvalidUtf8(f"token bytes are not valid UTF-8: {exc}") from None
            pending.clear()

    for tid in ids:
        tok = vocab.id_to_token.get(tid)
        if tok is None:
            raise UnknownId(tid)
        if tok in added:
            flush()
            parts.append(tok)
            continue
        try:
            pending.extend(ubytes[c] for c in tok)
        except KeyError:
            raise InvalidUtf8(f"token {tok!r} contains characters outside the byte alphabet") from None
    flush()
    return "".join(parts)


@dataclass(frozen=True)
class BoundaryTokenSet:
    ids: frozenset[int]
    marker: str = DEFAULT_MARKER

    def __contains__(self, token_id) -> bool:
        return token_id in self.ids

    def to_dict(self) -> dict:
        return {"marker": self.marker, "ids": sorted(self.ids)}

    @classmethod
    def from_doc(cls, doc) -> BoundaryTokenSet:
        if isinstance(doc, list):
            return cls(frozenset(int(i) for i in doc))
        if isinstance(doc, dict) and isinstance(doc.get("ids"), list):
            return cls(frozenset(int(i) for i in doc["ids"]), doc.get("marker", DEFAULT_MARKER))
        raise VocabularyError("boundary set must be a list of ids or {marker, ids}")

    @classmethod
    def from_json(cls, path) -> BoundaryTokenSet:
        try:
            return cls.from_doc(json.loads(Path(path).read_text(encoding="utf-8")))
        except json.JSONDecodeError as exc:
            raise VocabularyError(f"{path}: invalid JSON ({exc})") from None


def scan_boundary_tokens(vocab: Vocabulary, marker: str | None = None) -> BoundaryTokenSet:
    marker = marker or vocab.space_marker
    return BoundaryTokenSet(
        frozenset(tid for tok, tid in vocab.token_to_id.items() if marker in tok), marker
    )


@dataclass
class RoundtripReport:
    total: int
    failures: list[tuple[int, str, str | None]]

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "failures": [
                {"index": i, "original": o, "reconstructed": r} for i, o, r in self.failures
            ],
        }


def verify_roundtrip(vocab: Vocabulary, samples: Sequence[str]) -> RoundtripReport:
    """Encode and decode every sample; a sample that cannot be encoded at all
    is reported with ``reconstructed=None``."""
    failures = []
    for i, s in enumerate(samples):
        try:
            back = decode(vocab, encode(vocab, s))
        except VocabularyError:
            back = None
        if back != s:
            failures.append((i, s, back))
    return RoundtripReport(len(samples), failures)
