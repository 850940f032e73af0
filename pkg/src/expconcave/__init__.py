"""Learners for exp-concave losses over a norm ball.

Batch empirical risk minimization (:mod:`expconcave.erm`), an online Newton
variant with averaged output (:mod:`expconcave.ons`), and an experiment
harness that measures excess-risk decay rates (:mod:`expconcave.harness`).
"""
from .data import Dataset, LemmaOneSource, load_csv, sample, save_csv
from .erm import ErmConfig, empirical_risk, erm_solve
from .kernels import BACKEND
from .linalg import SpdState, project_ball_M, quad_form, rank_one_update
from .losses import LossKind, LossSpec, compute_constants, loss_derivative, loss_value
from .ons import (
    LearnerState,
    OnsConfig,
    ogd_baseline_step,
    ons_average,
    ons_init,
    ons_step,
    regret_of_run,
    run_ogd,
    run_ons,
)
from .records import VerifierRecord

__version__ = "0.1.0"
