from .verification import (
    EquilibriumVerifier,
    VerificationReport,
    Deviation,
    OracleResult,
    verify_step_stable,
    verify_epsilon_ne,
    enumerate_oracle,
    poa_pos,
)
from .metrics import EquilibriumReport, equilibrium_metrics, bc_contribution_cdf

__all__ = [
    "EquilibriumVerifier",
    "VerificationReport",
    "Deviation",
    "OracleResult",
    "verify_step_stable",
    "verify_epsilon_ne",
    "enumerate_oracle",
    "poa_pos",
    "EquilibriumReport",
    "equilibrium_metrics",
    "bc_contribution_cdf",
]
