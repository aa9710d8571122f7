"""Exception hierarchy for dtmflab."""


class DtmfError(Exception):
    """Base class for all dtmflab errors."""


class InvalidSymbolError(DtmfError, ValueError):
    """Glyph is not one of the 16 keypad symbols."""


class AliasingError(DtmfError, ValueError):
    """Sample rate too low for the requested tone."""


class ProfileError(DtmfError, ValueError):
    """Timing profile inconsistent with the dial string."""


class UndefinedSnrError(DtmfError, ValueError):
    """SNR is undefined because the reference has no power."""


class LengthError(DtmfError, ValueError):
    """Buffer length violates an operation's requirement."""


class SingularPointError(DtmfError, ValueError):
    """Evaluation point makes a transform or compensation factor singular."""


class WavFormatError(DtmfError, ValueError):
    """File is not a 16-bit mono PCM RIFF/WAVE file."""
