"""Exception hierarchy shared by all layerdump modules."""


class DumpError(Exception):
    """Base class for all errors raised by this package."""


class AudioError(DumpError):
    """An audio file is unreadable or has the wrong format."""


class ManifestError(DumpError):
    """An extraction manifest violates one of its invariants."""


class TextGridError(DumpError):
    """An aligner output file does not parse as a Praat TextGrid."""


class PhoneMapError(DumpError):
    """Phone symbols that do not collapse onto the 39-label inventory."""

    def __init__(self, symbols):
        self.symbols = tuple(sorted(set(symbols)))
        super().__init__("unmappable phone symbols: " + ", ".join(self.symbols))
