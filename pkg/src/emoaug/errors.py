"""Exception hierarchy shared across the package."""


class EmoaugError(Exception):
    """Base class for all errors raised by this package."""


class IngestError(EmoaugError):
    """A dataset file or record could not be parsed."""


class TaxonomyError(EmoaugError):
    """The emotion taxonomy file is malformed or a lookup failed."""


class LexiconError(EmoaugError):
    """A lexicon source file is malformed."""


class OperatorFailure(EmoaugError):
    """An augmentation operator could not be applied to this input.

    Not fatal: the caller retries with a different operator or position.
    """


class ProposerUnavailableError(EmoaugError):
    """The external word-proposal service could not be reached."""


class ProposerProtocolError(EmoaugError):
    """The external word-proposal service returned a malformed response."""


class AuthError(EmoaugError):
    """The remote API rejected our credentials."""


class FetchError(EmoaugError):
    """Comment fetching aborted; carries the partial count fetched so far."""

    def __init__(self, message: str, fetched: int = 0):
        super().__init__(message)
        self.fetched = fetched
