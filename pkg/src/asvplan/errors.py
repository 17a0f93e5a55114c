class PlanningError(Exception):
    """Raised when a geometric planning stage cannot produce a result."""


class SnapFailed(PlanningError):
    pass


class NoPathFound(PlanningError):
    pass


class InfeasibleCorner(PlanningError):
    def __init__(self, index: int, message: str):
        super().__init__(f"waypoint {index}: {message}")
        self.index = index


class InfeasibleSpeed(PlanningError):
    pass


class ScenarioError(ValueError):
    """Invalid or unreadable scenario file."""
