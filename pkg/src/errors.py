"""
Simulation Errors

Exception hierarchy shared by ingestion, environment construction, agents and
the command line. Every class carries the process exit code the CLI reports.
"""

from typing import Iterable, Optional


class SimulationError(Exception):
    """Base exception for the bandit simulation package"""
    exit_code = 4


class ConfigError(SimulationError):
    """Invalid configuration value or combination of options"""
    exit_code = 2


class DataError(SimulationError):
    """Problem with an input dataset or environment file"""
    exit_code = 3


class SchemaError(DataError):
    """Required column missing or schema config referencing absent columns"""
    pass


class DatasetRowError(DataError):
    """A single row could not be parsed or failed validation"""

    def __init__(self, path: str, line: int, message: str):
        self.path = str(path)
        self.line = line
        super().__init__(f"{self.path}:{line}: {message}")


class EmptyDatasetError(DataError):
    """Parsing or joining produced no usable items"""
    pass


class PreconditionError(DataError):
    """Operation called on data that does not satisfy its precondition"""
    pass


class VocabularyMismatchError(DataError):
    """Features present in the data but absent from the vocabulary"""

    def __init__(self, offenders: Iterable[str]):
        self.offenders = sorted(set(offenders))
        super().__init__(f"Features not in vocabulary: {self.offenders}")


class FeedbackRangeError(DataError):
    """Feedback value outside the declared scale"""
    pass


class ConsistencyError(DataError):
    """Cross-object reference that does not resolve"""
    pass


class DegenerateVectorError(DataError):
    """Zero-norm vector where a direction is required"""
    pass


class DimensionMismatchError(DataError):
    """State and action dimensions disagree"""
    pass


class ZeroNormRowError(DataError):
    """State or action matrix contains all-zero rows"""

    def __init__(self, kind: str, indices: Iterable[int]):
        self.kind = kind
        self.indices = list(indices)
        preview = self.indices[:20]
        more = f" (+{len(self.indices) - 20} more)" if len(self.indices) > 20 else ""
        super().__init__(f"Zero-norm {kind} rows at indices {preview}{more}")


class EnvironmentFileError(DataError):
    """Environment file cannot be read"""
    pass


class ChecksumError(EnvironmentFileError):
    """Payload digest does not match the recorded checksum"""
    pass


class FormatVersionError(EnvironmentFileError):
    """Unknown magic string or unsupported format version"""
    pass


class TruncatedFileError(EnvironmentFileError):
    """Environment file ends before all blocks were read"""
    pass


class InvariantViolation(SimulationError):
    """Internal invariant broken at runtime"""
    exit_code = 4


class AgentUpdateError(InvariantViolation):
    """Agent received a reward it cannot learn from"""

    def __init__(self, agent: str, reward: float, detail: Optional[str] = None):
        self.agent = agent
        self.reward = reward
        message = f"{agent} cannot update on reward {reward!r}"
        super().__init__(f"{message}: {detail}" if detail else message)
