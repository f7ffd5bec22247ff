"""Exception hierarchy shared by the whole package.

The CLI maps these onto process exit codes: bad inputs exit 1, judge
transport or protocol failures exit 2, and internal invariant violations
exit 3. Library callers can catch the same classes directly.
"""

from __future__ import annotations


class RuqevalError(Exception):
    """Base class for all errors raised by this package."""


class InputError(RuqevalError):
    """Caller-supplied data or configuration is invalid (exit code 1)."""


class LexiconError(InputError):
    """A keyword lexicon file failed to parse; message carries the line number."""


class UndefinedMetricError(InputError):
    """The requested statistic is undefined for the given data (e.g. single-class AUROC)."""


class DegenerateInputError(InputError):
    """The computation is degenerate for this data (e.g. zero-variance differences)."""


class TransportError(RuqevalError):
    """The judge endpoint was unreachable after retries (exit code 2)."""


class ProtocolError(RuqevalError):
    """The judge answered, but not in the agreed format (exit code 2).

    The offending payload is kept on the exception so operators can inspect
    what the model actually returned.
    """

    def __init__(self, message: str, payload: object = None):
        super().__init__(message)
        self.payload = payload


class InternalError(RuqevalError):
    """An internal invariant was violated; a bug, not a user error (exit code 3)."""
