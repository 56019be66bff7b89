"""Permutation recovery for unlabeled sensing with multiple measurement vectors."""
from .assignment import brute_force_lap, lap_maximize
from .bounds import (
    TheoryConstants,
    ThresholdReport,
    cor1_inachievable,
    log_det_term,
    log_factorial,
    minimax_dh_lower,
    prop1_fails,
    required_snr,
    thm1_inachievable,
    thm3_succeeds,
    thm4_succeeds,
    thm5_succeeds,
    threshold_report,
)
from .harness import SweepResult, SweepSpec, TrialSeed, emit_table2, run_sweep, run_trial
from .linalg import (
    Projector,
    frobenius_norm_sq,
    least_squares_solve,
    orth_projector,
    singular_values,
    stable_rank,
)
from .model import ModelParams, SensingInstance, Spectrum, generate, make_rng, residual, snr_of
from .permutation import Permutation, apply_rows, hamming, sample_with_hamming
from .solvers import AdmmConfig, AdmmTrace, admm_solve, estimate_b, init_sort, oracle_ml

__version__ = "0.1.0"
