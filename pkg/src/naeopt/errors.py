"""Semantic exceptions shared by all modules."""


class NaeoptError(Exception):
    """Base class for all library errors."""


class StructuralError(NaeoptError):
    """Malformed input: wrong shape, bad file format, inconsistent sizes."""


class DomainError(NaeoptError):
    """Input outside the mathematical domain of an operation."""
