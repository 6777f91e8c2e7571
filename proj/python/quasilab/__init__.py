"""Wright-Fisher sharp peak model: simulation, bounding chains, limit dynamics and rates."""

from ._quasilab import (
    ConvergenceError,
    CouplingViolation,
    GuardError,
    ModelParams,
    ValidationError,
    binomial_rate,
    cost_V1,
    critical_alpha,
    estimate_stationary,
    hitting_times,
    iterate_to_fixed_point,
    limit_map_F,
    lumped_mutation,
    multinomial_rate,
    occupancy_transition_prob,
    psi,
    reduced_transition_row,
    rho_star,
    validate,
    violations,
)

__all__ = [name for name in dir() if not name.startswith("_")]
