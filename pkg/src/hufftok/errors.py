class HufftokError(Exception):
    """Base class for all errors raised by hufftok."""


class AlignmentError(HufftokError):
    """Source and target sides of a parallel corpus differ in length."""


class MappingError(HufftokError):
    """A mapping file is missing, malformed, or fails its hash check."""


class SymbolRangeError(HufftokError, ValueError):
    """A symbol index or codepoint falls outside the alphabet."""
