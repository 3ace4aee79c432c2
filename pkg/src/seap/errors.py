"""Exception hierarchy shared by every seap module."""


class SeapError(Exception):
    """Base class for all errors raised by the library."""


class DeletedKeyError(SeapError):
    """Signing attempted with a private handle that was destroyed by rotation."""


class MalformedSignatureError(SeapError):
    """Signature length does not match the suite of the verifying key."""


class SlotsOccupiedError(SeapError):
    """Key genesis requested on a secure element whose slots are not empty."""


class FailedElementError(SeapError):
    """Operation requested on a secure element that has failed."""


class EmptySlotError(SeapError):
    """Operation requires an occupied key slot."""


class UnknownPartyError(SeapError, KeyError):
    """Registry lookup for an identifier that has no entry."""


class MalformedMessageError(SeapError):
    """Byte string cannot be decoded into a message."""


class NotCertifiedError(SeapError):
    """Satellite has not yet assembled its certificate of authorization."""


class BothElementsFailedError(SeapError):
    """No secure element is left to sign attestation evidence."""


class SerialMismatchError(SeapError):
    """Evidence names a secure element serial that was not pre-registered."""


class PolicyFlagMissingError(SeapError):
    """Slot report lacks the origin-internal or non-exportable flag."""


class GenesisConflictError(SeapError):
    """A genesis token arrived after attestation keys were already pinned."""


class InvalidHandoverError(SeapError):
    """Handover certificate does not verify against the current committee."""


class ConfigError(SeapError):
    """Scenario configuration is inconsistent or unreadable."""


class ConcurrencyBoundExceeded(SeapError):
    """Granting a channel corruption would exceed the concurrent channel bound."""


class WindowTooShortError(SeapError):
    """Requested channel corruption interval is shorter than the window W."""


class AssumptionGuardError(SeapError):
    """Attack requires violating a threat-model bound without the override flag."""
