"""Desk-scale laboratory for the Ising pure p-spin model.

Exhaustive landscapes at small n (level sets, overlap gaps, clustering,
Gibbs shattering diagnostics) together with calculators for the closed-form
exponents and Gaussian tail bounds that control them at large n.
"""

__version__ = "0.1.0"

from .errors import (
    BudgetExceeded,
    FactorizationError,
    OGPViolation,
    PSpinError,
    PreconditionError,
)

__all__ = [
    "__version__",
    "BudgetExceeded",
    "FactorizationError",
    "OGPViolation",
    "PSpinError",
    "PreconditionError",
]
