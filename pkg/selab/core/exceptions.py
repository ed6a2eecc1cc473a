"""
Custom exception hierarchy for the structural-entropy lab.
"""

from typing import Any, Dict, Optional


class LabException(Exception):
    """Base exception for all lab-specific errors"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}


class ConfigurationError(LabException):
    """Raised when there's a configuration problem"""

    pass


# ---------------------------------------------------------------------------
# Graph
# ---------------------------------------------------------------------------
class GraphError(LabException):
    """Base class for bipartite graph errors"""

    pass


class DanglingEndpointError(GraphError):
    """Raised when an edge references a vertex that does not exist"""

    def __init__(self, vertex_id: str):
        super().__init__(f"dangling endpoint {vertex_id}", {"vertex_id": vertex_id})
        self.vertex_id = vertex_id


class DuplicateEdgeError(GraphError):
    """Raised when a (user, post) pair is added twice"""

    def __init__(self, user_id: str, post_id: str):
        super().__init__(
            f"duplicate edge ({user_id}, {post_id})", {"user_id": user_id, "post_id": post_id}
        )
        self.user_id = user_id
        self.post_id = post_id


class UnknownVertexError(GraphError):
    """Raised when a vertex id is not part of the graph"""

    def __init__(self, vertex_id: str):
        super().__init__(f"unknown vertex {vertex_id}", {"vertex_id": vertex_id})
        self.vertex_id = vertex_id


class UndefinedCosineError(GraphError):
    """Raised when a zero feature vector makes the cosine undefined"""

    def __init__(self, message: str = "undefined cosine"):
        super().__init__(message)


class SyntheticSpecError(GraphError):
    """Raised when a synthetic graph specification is invalid"""

    pass


# ---------------------------------------------------------------------------
# Entropy / encoding trees
# ---------------------------------------------------------------------------
class EntropyError(LabException):
    """Base class for structural entropy errors"""

    pass


class EmptyGraphError(EntropyError):
    """Raised when the graph has zero total volume"""

    def __init__(self, message: str = "empty graph"):
        super().__init__(message)


class RootNodeError(EntropyError):
    """Raised when a root node is passed where a non-root node is required"""

    def __init__(self, message: str = "node entropy is undefined for the root"):
        super().__init__(message)


class TreeInvariantError(EntropyError):
    """Raised when an encoding tree violates its structural invariants"""

    pass


# ---------------------------------------------------------------------------
# Influence / categorization
# ---------------------------------------------------------------------------
class InfluenceError(LabException):
    """Base class for influence metric errors"""

    pass


class InvalidAdjustingParameterError(InfluenceError):
    """Raised when the adjusting parameter c is not positive"""

    def __init__(self, c: float):
        super().__init__(f"adjusting parameter must be > 0, got {c}", {"c": c})
        self.c = c


class MonotonicRegimeError(InfluenceError):
    """Raised when (b, c) fall outside the monotonic transform regime"""

    def __init__(self, b: float, c: float):
        super().__init__(
            f"influence monotonicity regime violated: need b >= 2 and 0 < c <= 2/e, got b={b}, c={c}",
            {"b": b, "c": c},
        )


class InfeasibleBudgetError(InfluenceError):
    """Raised when an influence slice holds fewer accounts than its budget"""

    def __init__(self, group: str, slice_size: int, budget: int):
        super().__init__(
            f"infeasible budget: {group} slice has {slice_size} accounts, budget is {budget}",
            {"group": group, "slice_size": slice_size, "budget": budget},
        )


# ---------------------------------------------------------------------------
# Detector
# ---------------------------------------------------------------------------
class DetectorError(LabException):
    """Base class for detector errors"""

    pass


class DimensionMismatchError(DetectorError):
    """Raised when graph features do not match the model input dimension"""

    def __init__(self, expected: int, actual: int):
        super().__init__(
            f"feature dimension mismatch: model expects {expected}, graph has {actual}",
            {"expected": expected, "actual": actual},
        )


class DegenerateLabelsError(DetectorError):
    """Raised when training data does not contain both classes"""

    def __init__(self, message: str = "degenerate labels", details: Optional[Dict[str, Any]] = None):
        super().__init__(message, details)


class EmptySubsetError(DetectorError):
    """Raised when a loss is requested over an empty post subset"""

    def __init__(self):
        super().__init__("empty post subset")


class BlackBoxViolationError(DetectorError):
    """Raised when the black-box contract of a detector is broken"""

    pass


# ---------------------------------------------------------------------------
# Attack
# ---------------------------------------------------------------------------
class AttackError(LabException):
    """Base class for attack engine errors"""

    pass


class UnknownTargetError(AttackError):
    """Raised when an attack target is not a post of the graph"""

    def __init__(self, post_id: str):
        super().__init__(f"unknown target post {post_id}", {"post_id": post_id})
        self.post_id = post_id


class AgentExhaustedError(AttackError):
    """Raised when none of an agent's accounts has a feasible post left"""

    def __init__(self, agent: str):
        super().__init__(f"agent exhausted: {agent}", {"agent": agent})
        self.agent = agent


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------
class PhaseError(LabException):
    """Raised when a pipeline phase fails for a given seed"""

    def __init__(self, phase: str, seed: int, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(f"Phase '{phase}' failed for seed {seed}: {message}", details)
        self.phase = phase
        self.seed = seed


class ReportError(LabException):
    """Raised when report artifacts cannot be written or read"""

    def __init__(self, path: str, message: str):
        super().__init__(f"report error at {path}: {message}", {"path": path})
        self.path = path
