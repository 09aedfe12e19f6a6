"""Exception hierarchy.

Every error carries a stable ``code`` so the CLI can render it verbatim and
scripts can match on it.
"""

from __future__ import annotations


class QSerreError(Exception):
    code = "E000"

    def __init__(self, message: str = "", **details):
        super().__init__(message)
        self.details = details


class UsageError(QSerreError):
    code = "E001"


class SchemaError(QSerreError):
    code = "E101"


class PresentationError(QSerreError):
    code = "E102"


class ConfluenceFailure(QSerreError):
    code = "E103"

    def __init__(self, degree: int, pair, message: str = ""):
        super().__init__(
            message or f"rewriting not confluent in degree {degree} at overlap {pair}",
            degree=degree,
            pair=pair,
        )
        self.degree = degree
        self.pair = pair


class NovikovError(QSerreError):
    code = "E104"


class GradingError(QSerreError):
    code = "E201"

    def __init__(self, generator: str, entry, message: str = ""):
        super().__init__(message or f"degree mismatch in d({generator}) at {entry}",
                         generator=generator, entry=entry)
        self.generator = generator
        self.entry = entry


class FiltrationError(QSerreError):
    code = "E202"


class TruncationError(QSerreError):
    code = "E203"

    def __init__(self, p: int, observed_drop, message: str = ""):
        super().__init__(message or f"d∘d drops filtration at p={p} by only {observed_drop}",
                         p=p, observed_drop=observed_drop)
        self.p = p
        self.observed_drop = observed_drop


class UnknownGenerator(QSerreError):
    code = "E204"


class PageOutOfRange(QSerreError):
    code = "E301"

    def __init__(self, r: int, message: str = ""):
        super().__init__(message or f"page {r} is not defined past the truncation order", r=r)
        self.r = r


class CutoffUnstable(QSerreError):
    code = "E302"


class NotExact(QSerreError):
    code = "E303"


class DefectTooLarge(QSerreError):
    code = "E304"


class InternalInconsistency(QSerreError):
    code = "E305"


class GateViolation(QSerreError):
    code = "E401"

    def __init__(self, entry, message: str = ""):
        super().__init__(message or f"GW entry fails the dimension gate: {entry}", entry=entry)
        self.entry = entry


class UnlabeledClass(QSerreError):
    code = "E402"


class ShapeMismatch(QSerreError):
    code = "E403"


class MissingGeometry(QSerreError):
    code = "E501"


class SpacingViolation(QSerreError):
    code = "E502"
