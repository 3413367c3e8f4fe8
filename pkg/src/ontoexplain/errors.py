class ExplainError(Exception):
    """Base class for all errors raised by this package."""


class DataError(ExplainError, ValueError):
    pass


class TrainingError(ExplainError):
    pass


class DegenerateInputError(ExplainError, ValueError):
    pass


class OntologyError(ExplainError, ValueError):
    pass


class RuleError(ExplainError, ValueError):
    pass


class SemanticCoverageError(ExplainError):
    pass


class EvidenceError(ExplainError):
    pass


class ConfigError(ExplainError, ValueError):
    pass


class PipelineError(ExplainError):
    """A stage failure, carrying the stage name and an exit status."""

    def __init__(self, stage: str, cause: BaseException, exit_code: int = 1):
        self.stage = stage
        self.cause = cause
        self.exit_code = exit_code
        super().__init__(f"stage {stage!r} failed: {cause}")
