"""Exception types shared across the engine.

Every error that can escape the public API carries a machine-readable
``code`` so the CLI can report failures uniformly.
"""

from __future__ import annotations


class CrexError(Exception):
    code = "ERROR"


class RegexSyntaxError(CrexError):
    """Pattern text is malformed. ``offset`` is the character position."""

    code = "SYNTAX"

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnsupportedFeatureError(CrexError):
    """Pattern uses a recognized feature outside the supported subset."""

    code = "UNSUPPORTED"

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class NotFlatError(CrexError):
    """Raised when an operation requires flat counting and the regex nests it."""

    code = "NOT_FLAT"


class ReplicationError(CrexError):
    """Irresolvable counter replication during augmented determinization.

    Carries the offending construction site and a witness input prefix
    (one representative byte per class) that drives the automaton to it.
    """

    code = "REPLICATION"

    def __init__(self, message: str, *, state=None, class_id=None,
                 counter_label: str = "", carrier: str = "",
                 witness: bytes = b""):
        super().__init__(message)
        self.state = state
        self.class_id = class_id
        self.counter_label = counter_label
        self.carrier = carrier
        self.witness = witness


class ResourceLimitError(CrexError):
    """A construction or simulation exceeded its configured cap."""

    code = "RESOURCE_LIMIT"

    def __init__(self, message: str, *, built: int = 0):
        super().__init__(message)
        self.built = built
