"""Exception hierarchy shared across the platform."""


class ExamCoachError(Exception):
    """Base class for all domain errors."""


class ParseError(ExamCoachError):
    """Input bytes could not be parsed at all.

    ``position`` is a byte offset for JSON inputs and a line number for
    line-delimited formats.
    """

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


class SchemaError(ExamCoachError):
    """Input parsed but violates the expected schema."""

    def __init__(self, message, question_no=None):
        super().__init__(message)
        self.question_no = question_no


class DuplicateIdError(ExamCoachError):
    def __init__(self, doc_id):
        super().__init__(f"duplicate doc_id: {doc_id}")
        self.doc_id = doc_id


class RerankError(ExamCoachError):
    def __init__(self, message, doc_id=None):
        super().__init__(message)
        self.doc_id = doc_id


class GenError(ExamCoachError):
    """Text-generation provider failure."""

    EMPTY_QUERY = "EmptyQuery"

    def __init__(self, message, reason=None):
        super().__init__(message)
        self.reason = reason


class CitationError(ExamCoachError):
    """Generated comment cites a document that was not supplied."""

    def __init__(self, doc_id):
        super().__init__(f"citation to unknown document: {doc_id}")
        self.doc_id = doc_id


class PipelineError(ExamCoachError):
    DOC_COUNT = "DocCount"

    def __init__(self, message, reason=None, stage=None):
        super().__init__(message)
        self.reason = reason
        self.stage = stage


class ResolutionError(ExamCoachError):
    SELF_RESOLVE = "SelfResolve"
    NOT_IN_DISPUTE = "NotInDispute"
    MISSING = "MissingResolution"

    def __init__(self, message, reason=None, field=None):
        super().__init__(message)
        self.reason = reason
        self.field = field


class IaaError(ExamCoachError):
    pass


class AggregateError(ExamCoachError):
    pass


class DomainError(ExamCoachError):
    pass


class ClockError(ExamCoachError):
    pass


class SessionError(ExamCoachError):
    OUT_OF_ORDER = "OutOfOrder"

    def __init__(self, message, reason=None):
        super().__init__(message)
        self.reason = reason


class BuildError(ExamCoachError):
    """Course assembly failed referential-integrity checks."""

    def __init__(self, message, missing=None):
        super().__init__(message)
        self.missing = list(missing or [])
