"""Shared exception base for the package.

Every error raised by ldesc on bad input or a failed computation derives
from LdescError, so callers can catch one type at the boundary. Subclasses
live next to the code that raises them.
"""


class LdescError(Exception):
    pass
