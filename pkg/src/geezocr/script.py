"""Model of the Ethiopic script: character classes and fidel decomposition.

Each consonant family occupies 8 consecutive codepoints of the Ethiopic
block, so family and vowel order fall out of block arithmetic::

    family      = (cp - 0x1200) // 8
    vowel_order = (cp - 0x1200) % 8 + 1

Labialization is not derivable from that arithmetic and comes from the
inventory's explicit codepoint list.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .exceptions import InventoryError, NotASyllograph

BLOCK_START = 0x1200
FAMILY_WIDTH = 8


class CharClass(str, enum.Enum):
    SYLLOGRAPH = "Syllograph"
    NUMERAL = "Numeral"
    PUNCTUATION = "Punctuation"
    NON_GEEZ = "NonGeez"


@dataclass(frozen=True)
class FidelChar:
    codepoint: int
    family: int
    vowel_order: int
    is_labialized: bool
    char_class: CharClass = CharClass.SYLLOGRAPH

    @property
    def char(self) -> str:
        return chr(self.codepoint)


def recompose(family: int, vowel_order: int) -> int:
    """Inverse of the block arithmetic used by :meth:`ScriptInventory.decompose`."""
    if family < 0 or not 1 <= vowel_order <= FAMILY_WIDTH:
        raise ValueError(f"invalid family/order ({family}, {vowel_order})")
    return BLOCK_START + family * FAMILY_WIDTH + (vowel_order - 1)


def _parse_codepoint(value) -> int:
    if isinstance(value, int):
        return value
    if not isinstance(value, str) or not value:
        raise InventoryError(f"cannot interpret {value!r} as a codepoint")
    if len(value) == 1:
        return ord(value)
    text = value.upper()
    for prefix in ("U+", "0X"):
        if text.startswith(prefix):
            text = text[len(prefix):]
            break
    try:
        return int(text, 16)
    except ValueError:
        raise InventoryError(f"cannot interpret {value!r} as a codepoint") from None


def _parse_range(value) -> tuple[int, int]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise InventoryError(f"range must be a [start, end] pair, got {value!r}")
    lo, hi = _parse_codepoint(value[0]), _parse_codepoint(value[1])
    if lo > hi:
        raise InventoryError(f"range start exceeds end: {value!r}")
    return lo, hi


@dataclass(frozen=True)
class ScriptInventory:
    """Codepoint ranges that define the script's character classes.

    Ranges are inclusive. The syllograph ranges must be sorted and disjoint,
    and the three class ranges may not overlap one another.
    """

    syllograph_ranges: tuple[tuple[int, int], ...]
    numeral_range: tuple[int, int]
    punctuation_range: tuple[int, int]
    labialized_set: frozenset[int]

    def __post_init__(self):
        spans = sorted(
            list(self.syllograph_ranges)
            + [self.numeral_range, self.punctuation_range]
        )
        for (_, prev_hi), (lo, _) in zip(spans, spans[1:]):
            if lo <= prev_hi:
                raise InventoryError("inventory ranges overlap")
        if list(self.syllograph_ranges) != sorted(self.syllograph_ranges):
            raise InventoryError("syllograph ranges must be sorted")
        for cp in self.labialized_set:
            if not self._in_syllographs(cp):
                raise InventoryError(
                    f"labialized U+{cp:04X} lies outside the syllograph ranges"
                )
        for lo, _ in self.syllograph_ranges:
            if lo < BLOCK_START:
                raise InventoryError("syllographs must start at or after U+1200")

    @classmethod
    def from_dict(cls, doc: dict) -> ScriptInventory:
        try:
            syl = tuple(_parse_range(r) for r in doc["syllograph_ranges"])
            num = _parse_range(doc["numeral_range"])
            punct = _parse_range(doc["punctuation_range"])
            lab = frozenset(_parse_codepoint(c) for c in doc.get("labialized", []))
        except KeyError as exc:
            raise InventoryError(f"inventory is missing field {exc.args[0]!r}") from None
        return cls(syl, num, punct, lab)

    @classmethod
    def from_json(cls, path) -> ScriptInventory:
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise InventoryError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(doc)

    def _in_syllographs(self, cp: int) -> bool:
        return any(lo <= cp <= hi for lo, hi in self.syllograph_ranges)

    def syllographs(self):
        for lo, hi in self.syllograph_ranges:
            yield from range(lo, hi + 1)

    def classify_char(self, c: str) -> CharClass:
        cp = ord(c)
        if self._in_syllographs(cp):
            return CharClass.SYLLOGRAPH
        lo, hi = self.numeral_range
        if lo <= cp <= hi:
            return CharClass.NUMERAL
        lo, hi = self.punctuation_range
        if lo <= cp <= hi:
            return CharClass.PUNCTUATION
        return CharClass.NON_GEEZ

    def decompose(self, c: str) -> FidelChar:
        if len(c) != 1 or self.classify_char(c) is not CharClass.SYLLOGRAPH:
            raise NotASyllograph(c)
        cp = ord(c)
        family, slot = divmod(cp - BLOCK_START, FAMILY_WIDTH)
        return FidelChar(cp, family, slot + 1, cp in self.labialized_set)

    def same_family(self, a: str, b: str) -> bool:
        return self.decompose(a).family == self.decompose(b).family

    def is_labialized(self, c: str) -> bool:
        return len(c) == 1 and ord(c) in self.labialized_set


@lru_cache(maxsize=1)
def default_inventory() -> ScriptInventory:
    """The built-in inventory covering the main Ethiopic block."""
    text = resources.files("geezocr").joinpath("data/default_inventory.json").read_text(
        encoding="utf-8"
    )
    return ScriptInventory.from_dict(json.loads(text))


def classify_char(c: str, inventory: ScriptInventory | None = None) -> CharClass:
    return (inventory or default_inventory()).classify_char(c)


def decompose(c: str, inventory: ScriptInventory | None = None) -> FidelChar:
    return (inventory or default_inventory()).decompose(c)


def same_family(a: str, b: str, inventory: ScriptInventory | None = None) -> bool:
    return (inventory or default_inventory()).same_family(a, b)
