"""Exception hierarchy.

Everything raised on bad input derives from :class:`DataError`, which the
CLI maps to exit code 2.
"""


class DataError(Exception):
    """Input data violates a precondition."""


class NotASyllograph(DataError, ValueError):
    def __init__(self, char: str):
        self.char = char
        cp = f"U+{ord(char):04X}" if len(char) == 1 else repr(char)
        super().__init__(f"{cp} is not an Ethiopic syllograph")


class InventoryError(DataError):
    pass


class VocabularyError(DataError):
    pass


class UnknownId(VocabularyError, KeyError):
    def __init__(self, token_id: int):
        self.token_id = token_id
        super().__init__(f"token id {token_id} is not in the vocabulary")

    def __str__(self) -> str:
        return self.args[0]


class InvalidUtf8(VocabularyError):
    pass


class MissingByteToken(VocabularyError):
    """A byte-level symbol needed for encoding has no vocabulary entry."""


class NonPositiveWeight(DataError, ValueError):
    pass


class LengthMismatch(DataError, ValueError):
    pass


class MalformedDistribution(DataError, ValueError):
    pass


class EmptyReference(DataError, ValueError):
    def __init__(self, sample_id=None):
        self.sample_id = sample_id
        where = f" (sample {sample_id!r})" if sample_id is not None else ""
        super().__init__(f"reference is empty{where}")


class EmptyCorpus(DataError, ValueError):
    def __init__(self, msg: str = "corpus is empty"):
        super().__init__(msg)


class NotAnError(DataError, ValueError):
    pass


class Malformed(DataError):
    def __init__(self, path, line: int, reason: str):
        self.path = path
        self.line = line
        self.reason = reason
        super().__init__(f"{path}:{line}: {reason}")


class DuplicateId(DataError):
    def __init__(self, sample_id: str, line: int):
        self.sample_id = sample_id
        self.line = line
        super().__init__(f"duplicate sample id {sample_id!r} at line {line}")


class OutOfRange(DataError, IndexError):
    pass
