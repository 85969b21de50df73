"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: InputError -> 2 (missing or
unreadable input), DataError -> 1 (data failed validation).
"""


class BiogdsError(Exception):
    """Base class for all toolkit errors."""


class InputError(BiogdsError):
    """An input file is missing, unreadable, or structurally broken."""


class DataError(BiogdsError):
    """Input was readable but violates a documented contract."""
