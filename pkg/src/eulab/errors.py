"""Error hierarchy.

Every error carries a short machine-readable ``code`` so that the CLI can
emit a JSON envelope and choose an exit status without string matching.
"""


class EulabError(Exception):
    """Base class for all library errors."""

    code = "eulab-error"
    exit_status = 3

    def __init__(self, message, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def envelope(self):
        return {"error": {"code": self.code, "message": self.message,
                          "details": _jsonable(self.details)}}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (str, int, bool)) or obj is None:
        return obj
    try:
        return float(obj)
    except (TypeError, ValueError):
        return repr(obj)


class ValidationError(EulabError):
    code = "validation"
    exit_status = 2


class ChartDomainError(EulabError, ValueError):
    code = "chart-domain"


class NearLinkError(ChartDomainError):
    code = "near-link"


class EvaluationError(EulabError):
    code = "evaluation"


class NumericError(EulabError):
    code = "numeric"


class QuadratureError(NumericError):
    code = "quadrature"


class StiffnessError(NumericError):
    code = "stiffness"


class EscapeError(NumericError):
    code = "escape"


class SectionError(NumericError):
    code = "section"


class NonReturnError(NumericError):
    code = "non-return"


class NoResonanceError(NumericError):
    code = "no-resonance"


class AmplitudeError(NumericError):
    code = "amplitude-too-large"


class NotFoundError(NumericError):
    code = "not-found"


class FitFailedError(NumericError):
    code = "fit-failed"


class PrecisionWarning(UserWarning):
    """Grid too coarse for the requested standard error."""
