"""Exception hierarchy.

Every error raised by the library derives from AgentcapError. The CLI maps
subtrees to exit codes: parse errors exit 2, validation and configuration
errors exit 3, budget exit 4, empty selection exit 5, numerical failures
exit 6. Specialized errors subclass ValidationError or ConfigurationError so
the mapping works on the base class.
"""

from __future__ import annotations


class AgentcapError(Exception):
    """Base class for all library errors."""


class ScenarioParseError(AgentcapError):
    """Scenario file is missing, malformed, or schema-incompatible."""


class ValidationError(AgentcapError):
    """Scenario contents violate a structural invariant."""


class EmptyFeasibleSetError(ValidationError):
    """Capacity excludes every candidate distribution."""


class ConfigurationError(AgentcapError):
    """Operation arguments are inconsistent with the scenario."""


class UndefinedCostPointError(ConfigurationError):
    """Cost queried at a distribution it is not defined on."""


class UnsupportedCostError(ConfigurationError):
    """Operation requires a cost capability this kind lacks."""


class InteriorityError(ConfigurationError):
    """Distribution has zero mass where a derivative is needed."""


class DifferentiabilityError(ConfigurationError):
    """Cost kind has no derivatives (table or effort grids)."""


class DegenerateScalingError(ConfigurationError):
    """Scaling factor zero where a scaled quantity is undefined."""


class DegenerateDiscountError(ConfigurationError):
    """Requested date reduction undefined (zero discount weight)."""


class DegenerateFitError(ConfigurationError):
    """Affine representation underdetermined (constant output)."""


class BudgetExceededError(AgentcapError):
    """Enumeration would exceed the configured evaluation budget."""

    def __init__(self, message: str, required: int = 0, budget: int = 0):
        super().__init__(message)
        self.required = required
        self.budget = budget


class EmptySelectionError(AgentcapError):
    """No admissible profile at the requested reservation level."""


class ConvergenceError(AgentcapError):
    """Iterative solve stopped without meeting its tolerance."""

    def __init__(self, message: str, last_iterate=None, residual=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


class SingularJacobianError(AgentcapError):
    """Linearized system too ill-conditioned to step."""

    def __init__(self, message: str, condition_number=None):
        super().__init__(message)
        self.condition_number = condition_number
