"""Central table of numeric tolerances and defaults.

Every tolerance in the package is absolute-plus-relative and lives here so
that a single edit retunes the whole artifact.
"""

# matkernel
JACOBI_OFFDIAG_REL = 1e-12     # Jacobi sweep stops at off(A) <= rel * ||A||_F
EIG_SUM_REL = 1e-8             # eigenvalue-sum vs trace consistency
SPD_RESIDUAL_REL = 1e-9        # solve_spd residual budget

# lmi / sdp
STRICTNESS_MARGIN = 1e-6       # M < 0 is assembled as -M - margin*I >= 0
SDP_GAP_TOL = 1e-7             # barrier duality-gap target
SDP_MAX_ITER = 200             # Newton iteration cap per barrier run
SDP_FEAS_TARGET = 1e-2         # phase-I early-exit margin
SDP_BOX_MULT = 1e4             # phase-I per-variable box half-width multiplier
SDP_FRACTION_TO_BOUNDARY = 0.98
SDP_BARRIER_MU = 10.0          # barrier parameter growth per outer round
SDP_INFEASIBLE_ABOVE = 1e-6    # phase-I optimum above this => infeasible
CERT_EIG_SLACK = 1e-8          # accepted solutions satisfy min eig >= -slack

# simulation
SIM_DT = 1e-4
SIM_REG_EPS = 1e-4
SIM_REACH_TOL = 1e-3
SIM_HORIZON_OVER_BOUND = 4.0   # default horizon = 4 * T_bound
SIM_LAYER_CFL = 1.0            # layer width floor = CFL * dt * ||B K||_2
