"""
Error types shared across the pipeline.

Builtin exception types are used wherever they fit; these subclasses only
add the context (row number, fold id) that callers need to report.
"""


class DataError(ValueError):
    """
    Malformed input data.

    Attributes:
        row: 1-based data row number (header excluded), if known
        path: Source file path, if known
    """

    def __init__(self, message: str, row: int | None = None, path: str | None = None):
        self.row = row
        self.path = path
        location = ""
        if path is not None:
            location += f"{path}"
        if row is not None:
            location += f"{':' if location else ''}row {row}"
        super().__init__(f"{location}: {message}" if location else message)


class FoldError(RuntimeError):
    """Failure inside one outer cross-validation fold."""

    def __init__(self, fold: int, cause: BaseException):
        self.fold = fold
        self.cause = cause
        super().__init__(f"fold {fold}: {type(cause).__name__}: {cause}")


class EmbeddingServiceError(RuntimeError):
    """Remote embedding service failed or broke its response contract."""
