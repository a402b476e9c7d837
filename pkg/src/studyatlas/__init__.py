"""studyatlas: faceted exploration engine for annotated research-study corpora."""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    NA,
    Criterion,
    FieldValue,
    Schema,
    StudyRecord,
    Violation,
    default_schema,
    schema_from_manifest,
    schema_to_manifest,
    validate_record,
)
from .snapshot import CorpusSnapshot  # noqa: F401
