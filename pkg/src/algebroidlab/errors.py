"""Error taxonomy shared across the package.

StructuralError: malformed input (shapes, arities, unknown references).
ValidationFailure: well-formed input that violates a mathematical
precondition; carries a witness payload for reporting.
"""

from __future__ import annotations

from typing import Optional


class LabError(Exception):
    pass


class StructuralError(LabError):
    pass


class ValidationFailure(LabError):
    def __init__(self, message: str, witness: Optional[dict] = None):
        super().__init__(message)
        self.witness = witness or {}
