"""Exception hierarchy shared by all modules."""


class CuntzError(Exception):
    """Base class for every error raised by this package."""


class BackendMismatchError(CuntzError, TypeError):
    """Operands carry different scalar backends."""


class ShapeError(CuntzError, ValueError):
    """Sizes of tuples or matrices do not match."""


class ResourceError(CuntzError, MemoryError):
    """A configured resource cap would be exceeded."""


class LevelCapError(ResourceError):
    """A block would need a word level above the configured maximum."""


class IndexCapError(ResourceError):
    """A basis index in the sequence-space representation exceeds its cap."""


class ConditionViolatedError(CuntzError, ValueError):
    """The smallness condition of the fixed-point lemma does not hold."""


class ParseError(CuntzError, ValueError):
    """Malformed element expression or rational literal."""
