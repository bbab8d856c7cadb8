"""Exception hierarchy shared across the package."""


class PosterPanelError(Exception):
    """Base class for all errors raised by this package."""


class DocumentParseError(PosterPanelError):
    """Input text is not a well-formed poster document."""

    def __init__(self, message: str, byte_offset: int | None = None):
        super().__init__(message)
        self.byte_offset = byte_offset


class InvalidDocumentError(PosterPanelError):
    """A document (or edit to one) violates a model invariant."""


class ElementNotFoundError(PosterPanelError):
    def __init__(self, element_id: str):
        super().__init__(f"no element with id {element_id!r}")
        self.element_id = element_id


class KindMismatchError(PosterPanelError):
    def __init__(self, element_id: str, expected: str, actual: str):
        super().__init__(
            f"element {element_id!r} is a {actual} element, expected {expected}"
        )
        self.element_id = element_id
        self.expected = expected
        self.actual = actual


class BackendError(PosterPanelError):
    """Transport-level failure talking to a generative backend."""


class GenerationError(PosterPanelError):
    """The backend could not produce a usable response for a pipeline step."""

    def __init__(self, tag: str, message: str, raw_text: str | None = None):
        super().__init__(f"[{tag}] {message}")
        self.tag = tag
        self.raw_text = raw_text


class SchemaError(PosterPanelError):
    """A structured payload failed validation against its registered schema."""


class StateError(PosterPanelError):
    """An operation was attempted in a state that does not allow it."""


class SessionNotFoundError(PosterPanelError):
    def __init__(self, session_id: str):
        super().__init__(f"no session {session_id!r}")
        self.session_id = session_id
