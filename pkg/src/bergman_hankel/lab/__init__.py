"""Scenario configs, experiment runners, report emission and the command line."""

from .scenario import Scenario, load_scenario, parse_scenario
from .report import ExperimentReport, emit_report
from .experiments import (rademacher_lower_bound, run_bda_profile, run_carleson_test,
                          run_classify_weight, run_decompose, run_hankel_verify_pq,
                          run_hankel_verify_qp, run_kernel_check)
