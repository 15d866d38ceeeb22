"""Exception types shared across the package.

``InputError`` covers everything a caller can fix (bad files, unknown
languages, out-of-range parameters); the service maps it to HTTP 400 and the
CLI to exit code 2. Anything else escaping an operation is an internal error.
"""


class InputError(Exception):
    """A problem with user-supplied input or configuration."""


class ParseError(InputError):
    """A file could not be parsed; message carries file and line."""


class IntegrityError(InputError):
    """Input violates a uniqueness or consistency requirement."""
