"""Command-line interface: one subcommand per pipeline stage.

Exit codes: 0 on success, 1 on usage errors, 2 on data errors. Every
subcommand writes one JSON document (or a JSON Lines stream) to
``--output`` or standard output; file outputs are written atomically.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .bpe import (
    DEFAULT_MARKER,
    BoundaryTokenSet,
    Vocabulary,
    added_tokens_doc,
    encode,
    extend_vocab,
    extract_charset,
    scan_boundary_tokens,
    verify_roundtrip,
)
from .corpus import compute_stats, ingest_directory, load_manifest, take_subset, write_manifest
from .exceptions import DataError, Malformed
from .metrics import Metric, bootstrap_ci, evaluate_corpus, tally_corpus
from .script import ScriptInventory, default_inventory
from .taxonomy import analyze_corpus
from .weighting import BOUNDARY_WEIGHT, PredictionBatch, compute_mask, weighted_cross_entropy

logger = logging.getLogger("geezocr")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# I/O helpers
# ---------------------------------------------------------------------------

def atomic_write(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(text: str, output) -> None:
    if output in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        atomic_write(output, text)


def dump_json(doc) -> str:
    return json.dumps(doc, ensure_ascii=False, indent=2) + "\n"


def dump_jsonl(rows) -> str:
    return "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows)


def open_text(path):
    if path in (None, "-"):
        return io.TextIOWrapper(sys.stdin.buffer, encoding="utf-8")
    return open(path, encoding="utf-8")


def read_jsonl(path) -> list[dict]:
    rows = []
    with open_text(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise Malformed(path or "<stdin>", lineno, f"invalid JSON ({exc.msg})") from None
            if not isinstance(row, dict):
                raise Malformed(path or "<stdin>", lineno, "expected a JSON object")
            rows.append(row)
    return rows


def read_predictions(path) -> list[tuple[str, str, str]]:
    triples = []
    for lineno, row in enumerate(read_jsonl(path), 1):
        ref, hyp = row.get("reference"), row.get("hypothesis")
        if not isinstance(ref, str) or not isinstance(hyp, str):
            raise Malformed(path, lineno, "needs string 'reference' and 'hypothesis' fields")
        triples.append((str(row.get("id", lineno - 1)), ref, hyp))
    return triples


def read_transcriptions(args) -> list[tuple[str, str]]:
    if args.manifest:
        return [(s.id, s.transcription) for s in load_manifest(args.manifest, args.header)]
    with open_text(args.text) as fh:
        return [(str(k), line.rstrip("\r\n")) for k, line in enumerate(fh) if line.rstrip("\r\n")]


def read_charset(path) -> list[str]:
    with open_text(path) as fh:
        raw = fh.read()
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError:
        doc = None
    if isinstance(doc, dict) and isinstance(doc.get("chars"), list):
        chars = doc["chars"]
    elif isinstance(doc, list):
        chars = doc
    else:
        chars = [c for line in raw.splitlines() for c in line]
    if not all(isinstance(c, str) and len(c) == 1 for c in chars):
        raise DataError(f"{path}: charset entries must be single characters")
    return list(dict.fromkeys(chars))


def load_vocab(args) -> Vocabulary:
    return Vocabulary.from_files(args.vocab, getattr(args, "merges", None),
                                 getattr(args, "added_tokens", None), args.marker)


def parse_id_list(text) -> list[int]:
    if not text:
        return []
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integer ids, got {text!r}") from None


def percent(x: float) -> str:
    return f"{100 * x:.2f}%"


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_charset_extract(args):
    texts = [t for _, t in read_transcriptions(args)]
    exclude = Vocabulary.from_files(args.exclude_vocab) if args.exclude_vocab else None
    chars = extract_charset(texts, non_ascii_only=args.non_ascii_only,
                            normalize=args.normalize, exclude_vocab=exclude)
    logger.info("%d unique characters from %d transcriptions", len(chars), len(texts))
    emit(dump_json({"n_transcriptions": len(texts), "size": len(chars), "chars": chars}),
         args.output)


def cmd_vocab_extend(args):
    base = load_vocab(args)
    charset = read_charset(args.charset)
    extended = extend_vocab(base, charset)
    added = added_tokens_doc(extended)[len(base.added_tokens):]
    if args.added_out:
        atomic_write(args.added_out, dump_json(added_tokens_doc(extended)))
    if args.vocab_out:
        atomic_write(args.vocab_out, dump_json(dict(extended.token_to_id)))
    emit(dump_json({
        "base_size": base.size,
        "new_size": extended.size,
        "charset_size": len(charset),
        "n_added": len(added),
        "n_skipped": len(charset) - len(added),
        "added_tokens": added,
    }), args.output)


def cmd_boundary_scan(args):
    vocab = load_vocab(args)
    boundary = scan_boundary_tokens(vocab, args.marker)
    added_hits = sorted(t for t in vocab.added_tokens if vocab.token_to_id[t] in boundary)
    if added_hits:
        logger.warning("%d added tokens contain the marker", len(added_hits))
    doc = boundary.to_dict()
    doc["count"] = len(boundary.ids)
    doc["vocab_size"] = vocab.size
    emit(dump_json(doc), args.output)


def cmd_tokenize(args):
    vocab = load_vocab(args)
    rows = read_transcriptions(args)
    if args.roundtrip_sample is not None:
        rng = np.random.default_rng(args.seed)
        k = min(args.roundtrip_sample, len(rows))
        picks = sorted(rng.choice(len(rows), size=k, replace=False).tolist())
        report = verify_roundtrip(vocab, [rows[i][1] for i in picks])
        doc = report.to_dict()
        for f in doc["failures"]:
            f["id"] = rows[picks[f["index"]]][0]
        doc["seed"] = args.seed
        emit(dump_json(doc), args.output)
        if not report.ok:
            raise DataError(f"{len(report.failures)} of {report.total} samples failed to round-trip")
        return
    emit(dump_jsonl({"id": sid, "text": text, "target_ids": encode(vocab, text)}
                    for sid, text in rows), args.output)


def cmd_weight_mask(args):
    boundary = BoundaryTokenSet.from_json(args.boundary)
    ignore = parse_id_list(args.ignore_ids)
    out = []
    for lineno, row in enumerate(read_jsonl(args.input), 1):
        targets = row.get("target_ids", row.get("targets"))
        if not isinstance(targets, list) or not all(isinstance(t, int) for t in targets):
            raise Malformed(args.input or "<stdin>", lineno, "needs an integer 'target_ids' list")
        mask = compute_mask(targets, boundary, args.weight, ignore_ids=ignore,
                            weight_successor=args.weight_successor)
        out.append({"id": str(row.get("id", lineno - 1)), "target_ids": targets,
                    "weights": mask.tolist()})
    emit(dump_jsonl(out), args.output)


def cmd_loss_eval(args):
    boundary = BoundaryTokenSet.from_json(args.boundary) if args.boundary else None
    ignore = parse_id_list(args.ignore_ids)
    samples = []
    total = weight_total = 0.0
    for lineno, row in enumerate(read_jsonl(args.input), 1):
        where = args.input or "<stdin>"
        if "targets" not in row or "log_probs" not in row:
            raise Malformed(where, lineno, "needs 'targets' and 'log_probs'")
        try:
            batch = PredictionBatch.from_lists(row["log_probs"], row["targets"], args.vocab_size)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, DataError):
                raise
            raise Malformed(where, lineno, str(exc)) from None
        if "weights" in row:
            weights = row["weights"]
        elif boundary is not None:
            weights = compute_mask(batch.targets.tolist(), boundary, args.weight,
                                   ignore_ids=ignore).weights
        else:
            raise UsageError(f"line {lineno} has no 'weights'; pass --boundary to derive them")
        res = weighted_cross_entropy(batch, weights)
        doc = {"id": str(row.get("id", lineno - 1)), "sum": res.sum, "mean": res.mean,
               "weight_total": res.weight_total}
        if args.per_position:
            doc["per_position"] = res.to_dict()["per_position"]
        samples.append(doc)
        total += res.sum
        weight_total += res.weight_total
    emit(dump_json({
        "n_samples": len(samples),
        "sum": total,
        "mean": total / weight_total if weight_total > 0 else 0.0,
        "weight_total": weight_total,
        "samples": samples,
    }), args.output)


def _interval_doc(metric: Metric, iv, single_pass: float) -> dict:
    return {
        "metric": metric.value,
        "low": iv.low,
        "high": iv.high,
        "point": iv.point,
        "single_pass": single_pass,
        "formatted": f"{percent(iv.point)} [{percent(iv.low)}, {percent(iv.high)}]",
    }


def cmd_evaluate(args):
    tallies = tally_corpus(read_predictions(args.predictions), args.geez_wordspace)
    report = evaluate_corpus(tallies, macro=args.macro)
    doc = report.to_dict()
    if args.intervals:
        single = {Metric.CER: report.cer, Metric.WER: report.wer, Metric.ACCURACY: report.accuracy}
        doc["intervals"] = {
            m.value: _interval_doc(m, bootstrap_ci(tallies, m, args.iterations, args.confidence,
                                                   args.seed, workers=args.workers), single[m])
            for m in Metric
        }
    if args.csv:
        buf = io.StringIO()
        row = report.csv_row()
        writer = csv.DictWriter(buf, fieldnames=list(row), lineterminator="\n")
        writer.writeheader()
        writer.writerow(row)
        atomic_write(args.csv, buf.getvalue())
    emit(dump_json(doc), args.output)


def cmd_bootstrap(args):
    tallies = tally_corpus(read_predictions(args.predictions), args.geez_wordspace)
    report = evaluate_corpus(tallies)
    single = {Metric.CER: report.cer, Metric.WER: report.wer, Metric.ACCURACY: report.accuracy}
    metrics = list(Metric) if args.metric == "all" else [Metric.parse(args.metric)]
    results = []
    for m in metrics:
        iv = bootstrap_ci(tallies, m, args.iterations, args.confidence, args.seed,
                          workers=args.workers)
        results.append(_interval_doc(m, iv, single[m]))
    emit(dump_json({
        "n_samples": report.n_samples,
        "iterations": args.iterations,
        "confidence": args.confidence,
        "seed": args.seed,
        "method": "percentile",
        "intervals": results,
    }), args.output)


def cmd_analyze_errors(args):
    inventory = ScriptInventory.from_json(args.inventory) if args.inventory else default_inventory()
    dist = analyze_corpus(read_predictions(args.predictions), inventory)
    if args.records:
        atomic_write(args.records, dump_jsonl(r.to_dict() for r in dist.records))
    if args.csv:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=["Category", "Frequency", "Distribution (%)"],
                                lineterminator="\n")
        writer.writeheader()
        writer.writerows(dist.table_rows())
        atomic_write(args.csv, buf.getvalue())
    emit(dump_json(dist.to_dict()), args.output)


def cmd_dataset_stats(args):
    samples = load_manifest(args.manifest, args.header)
    if args.offset is not None or args.count is not None:
        offset = args.offset or 0
        count = args.count if args.count is not None else len(samples) - offset
        samples = take_subset(samples, offset, count)
    doc = compute_stats(samples).to_dict()
    emit(dump_json(doc), args.output)


def cmd_ingest(args):
    samples = ingest_directory(args.dir)
    if not samples:
        raise DataError(f"no <stem>.png / <stem>.gt.txt pairs found under {args.dir}")
    buf = io.StringIO()
    write_manifest(samples, buf)
    emit(buf.getvalue(), args.output)
    logger.info("wrote %d samples", len(samples))


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _common(output_aliases=("-o", "--output")) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=42, help="random seed (default 42)")
    p.add_argument(*output_aliases, dest="output", metavar="PATH",
                   help="write the result here instead of standard output")
    p.add_argument("--quiet", action="store_true", help="only report errors")
    return p


def _add_vocab_args(p, merges=True):
    p.add_argument("--vocab", required=True, metavar="PATH", help="base vocab.json")
    if merges:
        p.add_argument("--merges", metavar="PATH", help="merges.txt")
    p.add_argument("--added-tokens", metavar="PATH", help="added-tokens JSON from vocab-extend")
    p.add_argument("--marker", default=DEFAULT_MARKER, metavar="CHAR",
                   help=f"space marker character (default {DEFAULT_MARKER})")


def _add_text_source(p, required=True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--manifest", metavar="PATH", help="manifest TSV (id, image_path, transcription)")
    g.add_argument("--text", metavar="PATH", help="one transcription per line ('-' for stdin)")
    p.add_argument("--header", action="store_true", help="manifest has a header row")


def _positive_int(text):
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return value


def _probability(text):
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {value}")
    return value


def _add_bootstrap_args(p):
    p.add_argument("--iterations", type=_positive_int, default=1000)
    p.add_argument("--confidence", type=_probability, default=0.95)
    p.add_argument("--workers", type=_positive_int, default=1,
                   help="threads for resampling; results do not depend on it")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="geezocr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    common = _common()

    p = sub.add_parser("charset-extract", parents=[common],
                       help="list the unique characters of a corpus")
    _add_text_source(p)
    p.add_argument("--non-ascii-only", action="store_true", help="keep codepoints >= U+0080 only")
    p.add_argument("--normalize", choices=["NFC", "NFD", "NFKC", "NFKD"],
                   help="Unicode-normalize transcriptions first (default: none)")
    p.add_argument("--exclude-vocab", metavar="PATH",
                   help="drop characters already a single token in this vocab.json")
    p.set_defaults(func=cmd_charset_extract)

    p = sub.add_parser("vocab-extend", parents=[common],
                       help="append novel characters as atomic tokens")
    _add_vocab_args(p)
    p.add_argument("--charset", required=True, metavar="PATH",
                   help="charset-extract output, a JSON list, or plain text")
    p.add_argument("--added-out", metavar="PATH", help="write the added-tokens file here")
    p.add_argument("--vocab-out", metavar="PATH", help="write the merged vocab.json here")
    p.set_defaults(func=cmd_vocab_extend)

    p = sub.add_parser("boundary-scan", parents=[common],
                       help="find tokens containing the space marker")
    _add_vocab_args(p, merges=False)
    p.set_defaults(func=cmd_boundary_scan)

    p = sub.add_parser("tokenize", parents=[common], help="encode transcriptions to token ids")
    _add_vocab_args(p)
    _add_text_source(p)
    p.add_argument("--roundtrip-sample", type=_positive_int, metavar="N",
                   help="instead of tokenizing, verify encode/decode on N random samples")
    p.set_defaults(func=cmd_tokenize)

    p = sub.add_parser("weight-mask", parents=[common], help="per-token loss weights")
    p.add_argument("--boundary", required=True, metavar="PATH", help="boundary-scan output")
    p.add_argument("--weight", type=float, default=BOUNDARY_WEIGHT,
                   help=f"weight of boundary tokens (default {BOUNDARY_WEIGHT})")
    p.add_argument("--input", metavar="PATH", help="tokenize output JSONL (default stdin)")
    p.add_argument("--ignore-ids", metavar="IDS", help="comma-separated ids given weight 0")
    p.add_argument("--weight-successor", action="store_true",
                   help="also weight the token after each boundary token")
    p.set_defaults(func=cmd_weight_mask)

    p = sub.add_parser("loss-eval", parents=[common],
                       help="weighted cross-entropy from supplied log-probabilities")
    p.add_argument("--input", metavar="PATH", help="JSONL with id, targets, log_probs")
    p.add_argument("--boundary", metavar="PATH", help="boundary set, used when rows lack weights")
    p.add_argument("--weight", type=float, default=BOUNDARY_WEIGHT)
    p.add_argument("--ignore-ids", metavar="IDS")
    p.add_argument("--vocab-size", type=_positive_int)
    p.add_argument("--per-position", action="store_true")
    p.set_defaults(func=cmd_loss_eval)

    p = sub.add_parser("evaluate", parents=[common], help="CER, WER and exact-match accuracy")
    p.add_argument("--predictions", required=True, metavar="PATH")
    p.add_argument("--macro", action="store_true", help="average per-sample rates instead")
    p.add_argument("--geez-wordspace", action="store_true",
                   help="also split words on U+1361 ETHIOPIC WORDSPACE")
    p.add_argument("--csv", metavar="PATH", help="write a CER/WER/Acc percentage row")
    p.add_argument("--intervals", action="store_true", help="add bootstrap intervals")
    _add_bootstrap_args(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bootstrap", parents=[common], help="bootstrap confidence intervals")
    p.add_argument("--predictions", required=True, metavar="PATH")
    p.add_argument("--metric", default="cer", choices=[m.value for m in Metric] + ["all"])
    p.add_argument("--geez-wordspace", action="store_true")
    _add_bootstrap_args(p)
    p.set_defaults(func=cmd_bootstrap)

    p = sub.add_parser("analyze-errors", parents=[common], help="six-category error breakdown")
    p.add_argument("--predictions", required=True, metavar="PATH")
    p.add_argument("--inventory", metavar="PATH", help="script inventory JSON")
    p.add_argument("--records", metavar="PATH", help="write per-sample records (JSONL)")
    p.add_argument("--csv", metavar="PATH", help="write the category table as CSV")
    p.set_defaults(func=cmd_analyze_errors)

    p = sub.add_parser("dataset-stats", parents=[common], help="transcription length statistics")
    p.add_argument("--manifest", required=True, metavar="PATH")
    p.add_argument("--header", action="store_true")
    p.add_argument("--offset", type=int)
    p.add_argument("--count", type=_positive_int)
    p.set_defaults(func=cmd_dataset_stats)

    p = sub.add_parser("ingest", parents=[_common(("-o", "--output", "--out"))],
                       help="build a manifest from <stem>.png + <stem>.gt.txt pairs")
    p.add_argument("--dir", required=True, metavar="PATH")
    p.set_defaults(func=cmd_ingest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.INFO,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        args.func(args)
    except UsageError as exc:
        print(f"geezocr {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError, UnicodeDecodeError) as exc:
        print(f"geezocr {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
