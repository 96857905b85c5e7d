"""Manifest loading and transcription-length statistics.

A manifest is UTF-8 TSV with three columns, ``id``, ``image_path`` and
``transcription``, and no header unless asked for. Image paths are carried
along untouched; nothing here opens an image.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

from .exceptions import DuplicateId, EmptyCorpus, Malformed, OutOfRange

logger = logging.getLogger(__name__)

GT_SUFFIX = ".gt.txt"


@dataclass(frozen=True)
class Sample:
    id: str
    image_path: str
    transcription: str


@dataclass(frozen=True)
class SplitStats:
    n_samples: int
    mean_len: float
    std_len: float
    min_len: int
    max_len: int

    def to_dict(self) -> dict:
        return asdict(self)


def parse_manifest(lines, path="<manifest>", header: bool = False) -> list[Sample]:
    samples = []
    seen: dict[str, int] = {}
    for lineno, line in enumerate(lines, 1):
        if header and lineno == 1:
            continue
        line = line.rstrip("\r\n")
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) != 3:
            raise Malformed(path, lineno, f"expected 3 tab-separated columns, found {len(cols)}")
        sid, image, text = cols
        if not sid:
            raise Malformed(path, lineno, "empty id")
        if not text:
            raise Malformed(path, lineno, f"empty transcription for id {sid!r}")
        if sid in seen:
            raise DuplicateId(sid, lineno)
        seen[sid] = lineno
        samples.append(Sample(sid, image, text))
    return samples


def load_manifest(path, header: bool = False) -> list[Sample]:
    with open(path, encoding="utf-8") as fh:
        return parse_manifest(fh, path, header)


def write_manifest(samples: Sequence[Sample], fh) -> None:
    for s in samples:
        fh.write(f"{s.id}\t{s.image_path}\t{s.transcription}\n")


def ingest_directory(directory) -> list[Sample]:
    """Pair ``<stem>.png`` with ``<stem>.gt.txt`` files in ``directory``.

    Samples are ordered by stem; image paths are relative to ``directory``.
    Only the first line of each ground-truth file is used. Unpaired files
    are skipped with a warning.
    """
    root = Path(directory)
    pngs = {p.name[:-4]: p for p in root.rglob("*.png")}
    gts = {p.name[: -len(GT_SUFFIX)]: p for p in root.rglob(f"*{GT_SUFFIX}")}
    samples = []
    for stem in sorted(pngs.keys() | gts.keys()):
        png, gt = pngs.get(stem), gts.get(stem)
        if png is None or gt is None:
            logger.warning("skipping unpaired %s", (png or gt).relative_to(root))
            continue
        if png.parent != gt.parent:
            logger.warning("skipping %s: image and text in different directories", stem)
            continue
        text = gt.read_text(encoding="utf-8").splitlines()
        text = text[0] if text else ""
        if not text or "\t" in text:
            logger.warning("skipping %s: empty or tab-containing transcription", stem)
            continue
        samples.append(Sample(stem, png.relative_to(root).as_posix(), text))
    return samples


def compute_stats(samples: Sequence[Sample]) -> SplitStats:
    """Population statistics of transcription length in Unicode scalar values."""
    if not samples:
        raise EmptyCorpus("cannot compute statistics of an empty split")
    lengths = [len(s.transcription) for s in samples]
    n = len(lengths)
    mean = math.fsum(lengths) / n
    var = math.fsum((x - mean) ** 2 for x in lengths) / n
    return SplitStats(n, mean, math.sqrt(var), min(lengths), max(lengths))


def take_subset(samples: Sequence[Sample], offset: int, count: int) -> list[Sample]:
    if offset < 0 or count <= 0:
        raise OutOfRange(f"offset must be >= 0 and count > 0 (got {offset}, {count})")
    if offset + count > len(samples):
        raise OutOfRange(f"slice [{offset}, {offset + count}) exceeds {len(samples)} samples")
    return list(samples[offset:offset + count])
