"""Cross-validation schemes and the estimate-vs-outcome experiment harness."""
from .experiment import (CVEstimate, SizeSweepResult, SizeSweepRow,
                         TrialLedger, TrialRow, dataset_size_sweep,
                         estimate_generalization_error, read_ledger_csv,
                         run_delta_eps_experiment, write_ledger_csv,
                         write_size_sweep_csv)
from .schemes import (ORDER_PRESERVING, SCHEMES, SchemeParams, SplitPlan,
                      make_splits)

__all__ = [
    "CVEstimate", "SizeSweepResult", "SizeSweepRow", "TrialLedger", "TrialRow",
    "dataset_size_sweep", "estimate_generalization_error", "read_ledger_csv",
    "run_delta_eps_experiment", "write_ledger_csv", "write_size_sweep_csv",
    "ORDER_PRESERVING", "SCHEMES", "SchemeParams", "SplitPlan", "make_splits",
]
