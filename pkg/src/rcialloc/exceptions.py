"""Exception hierarchy shared by every module of the package."""


class RCIError(Exception):
    """Base class for all package errors."""


class DegenerateGeometryError(RCIError, ValueError):
    """Two platforms share a position (zero link distance)."""

    def __init__(self, i, j):
        super().__init__(f"platforms {i} and {j} are co-located (zero distance)")
        self.pair = (i, j)


class NoIlluminationError(RCIError, ValueError):
    """A target column of the allocation carries no antenna."""

    def __init__(self, target):
        super().__init__(f"target {target} has no antenna allocated")
        self.target = target


class DegenerateQError(RCIError, ValueError):
    """Quadratic form p^T Q_z p is not strictly positive."""

    def __init__(self, target, value):
        super().__init__(f"target {target}: p^T Q p = {value!r} is not positive")
        self.target = target


class ObjectiveDomainError(RCIError, ValueError):
    """Objective or gradient requested outside its domain."""

    def __init__(self, target, message="quadratic or linear form not positive", iteration=None):
        where = f" (PGD iteration {iteration})" if iteration is not None else ""
        super().__init__(f"target {target}: {message}{where}")
        self.target = target
        self.iteration = iteration


class InfeasibleError(RCIError):
    """No allocation satisfies the constraints of the requested problem."""


class CapacityThresholdInfeasibleError(InfeasibleError):
    """The capacity reservation alone exceeds a platform budget."""

    def __init__(self, row, required, budget, eta):
        super().__init__(
            f"platform {row}: eta={eta} needs {required} comm antennas but budget is {budget}"
        )
        self.row = row
        self.required = required
        self.budget = budget
        self.eta = eta


class SearchSpaceTooLargeError(RCIError):
    """Exhaustive enumeration refused because the space is too large."""

    def __init__(self, size, limit):
        super().__init__(f"search space has {size} points, limit is {limit}")
        self.size = size
        self.limit = limit


class ScenarioError(RCIError, ValueError):
    """Scenario fails validation."""


class ScenarioFormatError(ScenarioError):
    """Scenario file could not be parsed."""


class SchemaVersionError(ScenarioFormatError):
    pass


class MissingFieldError(ScenarioFormatError):
    def __init__(self, field):
        super().__init__(f"scenario file is missing field {field!r}")
        self.field = field


class QAsymmetryError(ScenarioError):
    def __init__(self, target, deviation):
        super().__init__(f"Q for target {target} is not symmetric (max deviation {deviation:.3e})")
        self.target = target


class QNotPSDError(ScenarioError):
    def __init__(self, target, eigenvalue):
        super().__init__(f"Q for target {target} has negative eigenvalue {eigenvalue:.3e}")
        self.target = target


class BudgetError(ScenarioError):
    def __init__(self, platform, value):
        super().__init__(f"platform {platform} has invalid antenna budget {value!r} (need >= 1)")
        self.platform = platform
