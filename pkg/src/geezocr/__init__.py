"""Ge'ez OCR toolkit: tokenizer extension, boundary loss masks, evaluation."""

__version__ = "0.1.0"

from .bpe import (
    BoundaryTokenSet,
    Vocabulary,
    decode,
    encode,
    extend_vocab,
    extract_charset,
    scan_boundary_tokens,
    verify_roundtrip,
)
from .corpus import Sample, SplitStats, compute_stats, load_manifest, take_subset
from .metrics import (
    EditCounts,
    EvalReport,
    Metric,
    bootstrap_ci,
    cer,
    edit_counts,
    evaluate_corpus,
    exact_match,
    wer,
)
from .script import (
    CharClass,
    FidelChar,
    ScriptInventory,
    classify_char,
    decompose,
    default_inventory,
    same_family,
)
from .taxonomy import ErrorCategory, ErrorDistribution, ErrorRecord, analyze_corpus, classify_error
from .weighting import PredictionBatch, WeightMask, compute_mask, weighted_cross_entropy
