"""Numeric tolerances used throughout the package, kept in one record."""

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class NumericPolicy:
    hermitian_atol: float = 1e-12
    density_trace_atol: float = 1e-10
    density_hermitian_atol: float = 1e-10
    positivity_slack: float = 1e-6
    state_norm_atol: float = 1e-12
    unitary_atol: float = 1e-10
    correlation_quad_atol: float = 1e-8
    kernel_quad_atol: float = 1e-9
    trace_drift_atol: float = 1e-8
    ado_hermitian_atol: float = 1e-10
    survival_clamp_slack: float = 1e-9
    crossover_floor: float = 1e-12
    rate_zero_atol: float = 1e-12
    qutrit_bracket_imag_atol: float = 1e-10
    zeno_fit_residual: float = 0.05
    matsubara_tail_atol: float = 1e-4
    matsubara_cap: int = 64
    max_hierarchy_bytes: int = 1 << 30
    max_step_halvings: int = 4

    def with_(self, **changes):
        return replace(self, **changes)


DEFAULT_POLICY = NumericPolicy()
