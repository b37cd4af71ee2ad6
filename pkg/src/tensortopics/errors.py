"""Shared exception types."""


class DataFormatError(ValueError):
    """Malformed input: bad shapes, bad file contents, inconsistent config."""


class FitDegenerateError(RuntimeError):
    """The estimation pipeline hit a degenerate configuration.

    Messages name the stage (vocabulary threshold, ratio normalization,
    vertex hunt, weight recovery, topic mass) so callers can report a
    precise failure instead of a numerical crash.
    """
