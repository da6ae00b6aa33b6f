"""Exception hierarchy shared by all layerprobe modules."""


class ProbeError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(ProbeError):
    """A file or stream does not have the structure we expect."""


class DataError(ProbeError):
    """Input parsed fine but its values violate an invariant."""


class ShapeError(ProbeError):
    """Array has the wrong rank or incompatible dimensions."""


class InputError(ProbeError):
    """An argument violates an operation's precondition."""


class UnsupportedError(ProbeError):
    """The inputs are valid but describe a case we deliberately do not handle."""


class RangeError(InputError):
    """A time interval falls entirely outside the stream it indexes."""


class AlignmentError(InputError):
    """Two streams or matrices that must pair row-for-row do not."""


class UndefinedError(DataError):
    """The requested statistic has no defined value on this input."""


class MissingUtteranceError(InputError):
    """Alignment records reference utterances with no feature matrix."""

    def __init__(self, missing_ids):
        self.missing_ids = sorted(missing_ids)
        shown = ", ".join(self.missing_ids[:10])
        more = "" if len(self.missing_ids) <= 10 else f" (+{len(self.missing_ids) - 10} more)"
        super().__init__(f"no feature matrix for utterance(s): {shown}{more}")


class CoverageError(DataError):
    """Too few benchmark pairs are covered by the embedding table."""
