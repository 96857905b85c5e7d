"""Character and word error rates, exact match, and bootstrap intervals.

Corpus figures are micro-averaged: total edit operations over total
reference length. Characters are Unicode scalar values and no
normalization is applied anywhere.
"""

from __future__ import annotations

import enum
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

from . import _kernels
from .exceptions import EmptyCorpus, EmptyReference

_ASCII_WS = " \t\n\r\x0b\x0c"
_WORD_SPLIT = re.compile(f"[{re.escape(_ASCII_WS)}]+")
_WORD_SPLIT_GEEZ = re.compile(f"[{re.escape(_ASCII_WS)}፡]+")


@dataclass(frozen=True)
class EditCounts:
    substitutions: int = 0
    deletions: int = 0
    insertions: int = 0
    reference_length: int = 0

    @property
    def distance(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def rate(self) -> float:
        if self.reference_length == 0:
            raise EmptyReference()
        return self.distance / self.reference_length

    def __add__(self, other: EditCounts) -> EditCounts:
        return EditCounts(
            self.substitutions + other.substitutions,
            self.deletions + other.deletions,
            self.insertions + other.insertions,
            self.reference_length + other.reference_length,
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["distance"] = self.distance
        return d


def _encode_symbols(*seqs: Sequence[Hashable]) -> list[np.ndarray]:
    table: dict = {}
    out = []
    for seq in seqs:
        out.append(np.fromiter((table.setdefault(s, len(table)) for s in seq),
                               dtype=np.int64, count=len(seq)))
    return out


def alignment(reference: Sequence[Hashable], hypothesis: Sequence[Hashable]):
    """Unit-cost alignment as ``(ops, ref_pos, hyp_pos)`` arrays.

    See :func:`geezocr._kernels.align` for the op codes and tie-breaking.
    """
    ref, hyp = _encode_symbols(reference, hypothesis)
    return _kernels.align(ref, hyp)


def edit_counts(reference: Sequence[Hashable], hypothesis: Sequence[Hashable]) -> EditCounts:
    ops, _, _ = alignment(reference, hypothesis)
    tally = np.bincount(ops, minlength=4)
    return EditCounts(int(tally[1]), int(tally[2]), int(tally[3]), len(reference))


def split_words(text: str, geez_wordspace: bool = False) -> list[str]:
    pattern = _WORD_SPLIT_GEEZ if geez_wordspace else _WORD_SPLIT
    return [w for w in pattern.split(text) if w]


def cer(reference: str, hypothesis: str) -> float:
    if not reference:
        raise EmptyReference()
    return edit_counts(reference, hypothesis).rate


def wer(reference: str, hypothesis: str, geez_wordspace: bool = False) -> float:
    ref_words = split_words(reference, geez_wordspace)
    if not ref_words:
        raise EmptyReference()
    return edit_counts(ref_words, split_words(hypothesis, geez_wordspace)).rate


def exact_match(reference: str, hypothesis: str) -> bool:
    return reference == hypothesis


class Metric(str, enum.Enum):
    CER = "cer"
    WER = "wer"
    ACCURACY = "accuracy"

    @classmethod
    def parse(cls, value) -> Metric:
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


@dataclass(frozen=True)
class Interval:
    low: float
    high: float
    point: float

    def as_tuple(self) -> tuple[float, float, float]:
        return self.low, self.high, self.point


@dataclass
class EvalReport:
    cer: float
    wer: float
    accuracy: float
    totals: EditCounts
    word_totals: EditCounts
    n_samples: int
    exact_matches: int
    averaging: str = "micro"
    intervals: dict[str, Interval] | None = field(default=None)

    def to_dict(self) -> dict:
        doc = {
            "cer": self.cer,
            "wer": self.wer,
            "accuracy": self.accuracy,
            "n_samples": self.n_samples,
            "exact_matches": self.exact_matches,
            "averaging": self.averaging,
            "totals": self.totals.to_dict(),
            "word_totals": self.word_totals.to_dict(),
        }
        if self.intervals is not None:
            doc["intervals"] = {k: asdict(v) for k, v in self.intervals.items()}
        return doc

    def csv_row(self) -> dict:
        """Percentages in the column order CER, WER, Acc."""
        return {
            "CER (%)": f"{self.cer * 100:.2f}",
            "WER (%)": f"{self.wer * 100:.2f}",
            "Acc. (%)": f"{self.accuracy * 100:.2f}",
        }


@dataclass(frozen=True)
class SampleTallies:
    """Per-sample integer tallies; every corpus metric is a ratio of their sums."""

    ids: tuple[str, ...]
    char_edits: np.ndarray
    char_len: np.ndarray
    word_edits: np.ndarray
    word_len: np.ndarray
    exact: np.ndarray
    char_counts: np.ndarray
    word_counts: np.ndarray

    def __len__(self) -> int:
        return len(self.ids)

    def numer_denom(self, metric: Metric) -> tuple[np.ndarray, np.ndarray]:
        if metric is Metric.CER:
            return self.char_edits, self.char_len
        if metric is Metric.WER:
            return self.word_edits, self.word_len
        return self.exact, np.ones_like(self.exact)


def _flatten(seqs: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    offsets = np.zeros(len(seqs) + 1, dtype=np.int64)
    np.cumsum([len(s) for s in seqs], out=offsets[1:])
    flat = np.concatenate(seqs) if seqs else np.empty(0, dtype=np.int64)
    return flat.astype(np.int64, copy=False), offsets


def _batch(refs: list[Sequence], hyps: list[Sequence]) -> np.ndarray:
    table: dict = {}
    def enc(seq):
        return np.fromiter((table.setdefault(s, len(table)) for s in seq),
                           dtype=np.int64, count=len(seq))
    flat_r, off_r = _flatten([enc(r) for r in refs])
    flat_h, off_h = _flatten([enc(h) for h in hyps])
    return _kernels.batch_counts(flat_r, off_r, flat_h, off_h)


def _normalize_pairs(pairs) -> list[tuple[str, str, str]]:
    out = []
    for k, p in enumerate(pairs):
        if len(p) == 3:
            out.append((str(p[0]), p[1], p[2]))
        else:
            out.append((str(k), p[0], p[1]))
    return out


def tally_corpus(pairs: Iterable, geez_wordspace: bool = False) -> SampleTallies:
    """Compute per-sample edit tallies.

    ``pairs`` holds ``(id, reference, hypothesis)`` triples; bare
    ``(reference, hypothesis)`` pairs get their index as id.
    """
    triples = _normalize_pairs(pairs)
    if not triples:
        raise EmptyCorpus()
    ref_words = []
    for sid, ref, _ in triples:
        if not ref:
            raise EmptyReference(sid)
        words = split_words(ref, geez_wordspace)
        if not words:
            raise EmptyReference(sid)
        ref_words.append(words)
    hyp_words = [split_words(h, geez_wordspace) for _, _, h in triples]

    char_counts = _batch([r for _, r, _ in triples], [h for _, _, h in triples])
    word_counts = _batch(ref_words, hyp_words)
    return SampleTallies(
        ids=tuple(t[0] for t in triples),
        char_edits=char_counts.sum(axis=1),
        char_len=np.array([len(r) for _, r, _ in triples], dtype=np.int64),
        word_edits=word_counts.sum(axis=1),
        word_len=np.array([len(w) for w in ref_words], dtype=np.int64),
        exact=np.array([r == h for _, r, h in triples], dtype=np.int64),
        char_counts=char_counts,
        word_counts=word_counts,
    )


def _totals(counts: np.ndarray, lengths: np.ndarray) -> EditCounts:
    s, d, i = (int(x) for x in counts.sum(axis=0))
    return EditCounts(s, d, i, int(lengths.sum()))


def evaluate_corpus(pairs: Iterable, *, macro: bool = False,
                    geez_wordspace: bool = False) -> EvalReport:
    t = pairs if isinstance(pairs, SampleTallies) else tally_corpus(pairs, geez_wordspace)
    totals = _totals(t.char_counts, t.char_len)
    word_totals = _totals(t.word_counts, t.word_len)
    if macro:
        cer_value = float(np.mean(t.char_edits / t.char_len))
        wer_value = float(np.mean(t.word_edits / t.word_len))
    else:
        cer_value = totals.rate
        wer_value = word_totals.rate
    n = len(t)
    matches = int(t.exact.sum())
    return EvalReport(
        cer=cer_value,
        wer=wer_value,
        accuracy=matches / n,
        totals=totals,
        word_totals=word_totals,
        n_samples=n,
        exact_matches=matches,
        averaging="macro" if macro else "micro",
    )


def resample_indices(n: int, iterations: int, seed: int, workers: int = 1) -> np.ndarray:
    """``(iterations, n)`` bootstrap index matrix.

    Row ``b`` is drawn from its own PCG64 stream spawned from
    ``SeedSequence(seed)``, so the matrix does not depend on ``workers``.
    """
    children = np.random.SeedSequence(seed).spawn(iterations)
    out = np.empty((iterations, n), dtype=np.int64)

    def fill(rows: range):
        for b in rows:
            out[b] = np.random.Generator(np.random.PCG64(children[b])).integers(0, n, size=n)

    if workers <= 1 or iterations < 2:
        fill(range(iterations))
    else:
        step = -(-iterations // workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, [range(s, min(s + step, iterations))
                                 for s in range(0, iterations, step)]))
    return out


def bootstrap_distribution(tallies: SampleTallies, metric, iterations: int = 1000,
                           seed: int = 42, workers: int = 1) -> np.ndarray:
    if len(tallies) == 0:
        raise EmptyCorpus()
    if iterations < 1:
        raise ValueError("iterations must be positive")
    metric = Metric.parse(metric)
    numer, denom = tallies.numer_denom(metric)
    idx = resample_indices(len(tallies), iterations, seed, workers)
    return _kernels.resample_ratios(idx, numer, denom)


def bootstrap_ci(pairs, metric="cer", iterations: int = 1000, confidence: float = 0.95,
                 seed: int = 42, *, workers: int = 1,
                 geez_wordspace: bool = False) -> Interval:
    """Percentile bootstrap interval of a micro-averaged corpus metric.

    ``point`` is the mean over resamples, which generally differs a little
    from the single-pass corpus value.
    """
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must lie in (0, 1)")
    t = pairs if isinstance(pairs, SampleTallies) else tally_corpus(pairs, geez_wordspace)
    stats = bootstrap_distribution(t, metric, iterations, seed, workers)
    alpha = 1.0 - confidence
    low, high = np.percentile(stats, [100 * alpha / 2, 100 * (1 - alpha / 2)])
    return Interval(float(low), float(high), float(stats.mean()))
