"""Exception types shared across the package."""


class DataError(Exception):
    """Bad or missing input data: files, labels, dimensions, remote fetches."""


class ModelFormatError(Exception):
    """Model file cannot be read: bad JSON, wrong schema version, checksum mismatch."""


class UsageError(Exception):
    """Command line was invoked with invalid arguments."""
