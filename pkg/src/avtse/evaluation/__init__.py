from .metrics import si_sdri
from .conditions import CONDITION_KINDS, ConditionReport, InferenceCondition, evaluate_condition
from .self_enrol import SelfEnrolmentResult, compose_self_enrolment_examples, self_enrolment_run
from .report import raw_values_filename, write_raw_values, write_report_grid

__all__ = [
    "si_sdri",
    "CONDITION_KINDS",
    "InferenceCondition",
    "ConditionReport",
    "evaluate_condition",
    "SelfEnrolmentResult",
    "compose_self_enrolment_examples",
    "self_enrolment_run",
    "write_report_grid",
    "write_raw_values",
    "raw_values_filename",
]
