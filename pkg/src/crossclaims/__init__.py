"""Priority and random arrival rules for multi-issue bankruptcy problems with crossed claims."""

from crossclaims.crastar import crastar_exact, crastar_for_issue_order, crastar_sample
from crossclaims.model import (
    Allocation, MbcProblem, ParetoVerdict, ProblemError, is_feasible, is_pareto_efficient,
    validate_problem,
)
from crossclaims.rules import BudgetExceeded, RuleValue, cra_exact, cra_sample, csp

__all__ = [
    "Allocation", "BudgetExceeded", "MbcProblem", "ParetoVerdict", "ProblemError", "RuleValue",
    "cra_exact", "cra_sample", "crastar_exact", "crastar_for_issue_order", "crastar_sample",
    "csp", "is_feasible", "is_pareto_efficient", "validate_problem",
]
