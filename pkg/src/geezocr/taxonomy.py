"""Rule-based classification of recognition errors into six categories.

Every mismatched sample gets exactly one category. The rules look only at
the characters touched by the character-level alignment and are tried in
order, most specific first:

1. boundary/spacing    any edited character is whitespace
2. digits/mixed script any edited character is an ASCII digit, a Latin
                       letter or an Ethiopic numeral
3. punctuation         any edited character is Ethiopic or other punctuation
4. labialized          a substitution touches a labialized syllograph
5. diacritic           a substitution stays within one consonant family
6. visual substitution everything else, including bare syllograph
                       insertions and deletions
"""

from __future__ import annotations

import enum
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from ._kernels import OP_DEL, OP_INS, OP_MATCH, OP_SUB
from .exceptions import EmptyCorpus, NotAnError
from .metrics import alignment
from .script import CharClass, ScriptInventory, default_inventory

_OP_NAMES = {OP_SUB: "substitution", OP_DEL: "deletion", OP_INS: "insertion"}


class ErrorCategory(str, enum.Enum):
    DIGITS_MIXED_SCRIPT = "DigitsMixedScript"
    VISUAL_SUBSTITUTION = "VisualSubstitution"
    DIACRITIC_CONFUSION = "DiacriticConfusion"
    LABIALIZED_ERROR = "LabializedError"
    PUNCTUATION_ERROR = "PunctuationError"
    BOUNDARY_SPACING = "BoundarySpacing"

    @property
    def label(self) -> str:
        return _LABELS[self]


_LABELS = {
    ErrorCategory.DIGITS_MIXED_SCRIPT: "Digits and mixed-script errors",
    ErrorCategory.VISUAL_SUBSTITUTION: "Visual character substitutions",
    ErrorCategory.DIACRITIC_CONFUSION: "Diacritic confusions",
    ErrorCategory.LABIALIZED_ERROR: "Labialized character errors",
    ErrorCategory.PUNCTUATION_ERROR: "Punctuation errors",
    ErrorCategory.BOUNDARY_SPACING: "Boundary and spacing errors",
}

# Reporting order, largest category first as usually tabulated.
CATEGORY_ORDER = tuple(_LABELS)


@dataclass(frozen=True)
class EditOp:
    op: str
    ref_index: int
    hyp_index: int
    ref_char: str | None
    hyp_char: str | None

    def chars(self):
        return [c for c in (self.ref_char, self.hyp_char) if c is not None]


@dataclass(frozen=True)
class ErrorRecord:
    sample_id: str
    reference: str
    hypothesis: str
    category: ErrorCategory
    evidence: tuple[EditOp, ...]

    def to_dict(self) -> dict:
        return {
            "id": self.sample_id,
            "reference": self.reference,
            "hypothesis": self.hypothesis,
            "category": self.category.value,
            "evidence": [vars(e) for e in self.evidence],
        }


def _is_latin_letter(c: str) -> bool:
    return c.isalpha() and unicodedata.name(c, "").startswith("LATIN")


def _is_digit_or_mixed(c: str, inv: ScriptInventory) -> bool:
    return ("0" <= c <= "9") or _is_latin_letter(c) or inv.classify_char(c) is CharClass.NUMERAL


def _is_punct(c: str, inv: ScriptInventory) -> bool:
    return inv.classify_char(c) is CharClass.PUNCTUATION or unicodedata.category(c).startswith("P")


def edit_ops(reference: str, hypothesis: str) -> list[EditOp]:
    ops, ri, hj = alignment(reference, hypothesis)
    out = []
    for op, i, j in zip(ops.tolist(), ri.tolist(), hj.tolist()):
        if op == OP_MATCH:
            continue
        out.append(EditOp(
            _OP_NAMES[op], i, j,
            reference[i] if op != OP_INS else None,
            hypothesis[j] if op != OP_DEL else None,
        ))
    return out


def _categorize(ops: list[EditOp], inv: ScriptInventory) -> tuple[ErrorCategory, list[EditOp]]:
    def hits(pred, subs_only=False):
        return [e for e in ops if (not subs_only or e.op == "substitution")
                and any(pred(c) for c in e.chars())]

    rules = [
        (ErrorCategory.BOUNDARY_SPACING, lambda c: c.isspace(), False),
        (ErrorCategory.DIGITS_MIXED_SCRIPT, lambda c: _is_digit_or_mixed(c, inv), False),
        (ErrorCategory.PUNCTUATION_ERROR, lambda c: _is_punct(c, inv), False),
        (ErrorCategory.LABIALIZED_ERROR, inv.is_labialized, True),
    ]
    for category, pred, subs_only in rules:
        found = hits(pred, subs_only)
        if found:
            return category, found

    def same_family(e: EditOp) -> bool:
        a, b = e.ref_char, e.hyp_char
        return (inv.classify_char(a) is CharClass.SYLLOGRAPH
                and inv.classify_char(b) is CharClass.SYLLOGRAPH
                and inv.same_family(a, b))

    found = [e for e in ops if e.op == "substitution" and same_family(e)]
    if found:
        return ErrorCategory.DIACRITIC_CONFUSION, found
    return ErrorCategory.VISUAL_SUBSTITUTION, ops


def classify_error(reference: str, hypothesis: str, inventory: ScriptInventory | None = None,
                   sample_id: str = "") -> ErrorRecord:
    if reference == hypothesis:
        raise NotAnError(f"sample {sample_id!r}: reference equals hypothesis")
    inv = inventory or default_inventory()
    category, evidence = _categorize(edit_ops(reference, hypothesis), inv)
    return ErrorRecord(sample_id, reference, hypothesis, category, tuple(evidence))


@dataclass
class ErrorDistribution:
    counts: dict[ErrorCategory, int]
    total_errors: int
    total_samples: int
    records: list[ErrorRecord] = field(default_factory=list, repr=False)

    def percentages(self) -> dict[ErrorCategory, float]:
        """Shares of the whole corpus, not of the errors."""
        return {c: 100.0 * n / self.total_samples for c, n in self.counts.items()}

    def to_dict(self) -> dict:
        pct = self.percentages()
        return {
            "counts": {c.value: self.counts[c] for c in CATEGORY_ORDER},
            "percentages": {c.value: pct[c] for c in CATEGORY_ORDER},
            "total_errors": self.total_errors,
            "total_samples": self.total_samples,
            "error_percentage": 100.0 * self.total_errors / self.total_samples,
        }

    def table_rows(self) -> list[dict]:
        pct = self.percentages()
        rows = [{"Category": c.label, "Frequency": self.counts[c],
                 "Distribution (%)": f"{pct[c]:.2f}"} for c in CATEGORY_ORDER]
        rows.append({"Category": "Total errors", "Frequency": self.total_errors,
                     "Distribution (%)": f"{100.0 * self.total_errors / self.total_samples:.2f}"})
        return rows


def analyze_corpus(pairs: Iterable, inventory: ScriptInventory | None = None) -> ErrorDistribution:
    inv = inventory or default_inventory()
    records = []
    n = 0
    for k, p in enumerate(pairs):
        sid, ref, hyp = (str(p[0]), p[1], p[2]) if len(p) == 3 else (str(k), p[0], p[1])
        n += 1
        if ref != hyp:
            records.append(classify_error(ref, hyp, inv, sid))
    if n == 0:
        raise EmptyCorpus()
    tally = Counter(r.category for r in records)
    counts = {c: tally.get(c, 0) for c in CATEGORY_ORDER}
    return ErrorDistribution(counts, len(records), n, records)
