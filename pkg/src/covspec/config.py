"""Default tolerances and budgets shared by every scenario report."""

DEFAULTS = {
    # monotonicity under coverings
    "monotonicity_tol": 1e-9,
    "pushdown_tol": 1e-9,
    "pushdown_norm_tol": 1e-12,
    # amenable coverings
    "tame_finite_tol": 1e-8,
    "tame_gap_tol": 0.05,
    # non-amenable coverings; the base needs lambda_ess - lambda_0 above this
    "hypothesis_gap_tol": 0.01,
    "name_min_gap": 0.0,
    # finite-edit stability: estimates must agree within 2 * stability_tol
    "stability_tol": 0.005,
    # ground-state transform
    "intertwining_spectrum_tol": 1e-8,
    "intertwining_rayleigh_tol": 1e-9,
    # Følner / random walk
    "folner_eps": 0.05,
    "plateau_delta": 0.05,
    # gallery headline claims
    "exa00_ess_max": 0.01,
    "exa00_lambda0_max": 1e-9,
    "exabcd_lambda0_min": 0.5,
    "salpha_tail_max": 0.01,
}
