"""Highway junction route prediction with a from-scratch kernel SVM."""

from .traffic_sim import ConfigError, ScenarioConfig, Trace, TrajectoryPoint, generate_trace, vehicle_position
from .svm import (
    KernelSpec,
    LabeledExample,
    SvmModel,
    TrainConfig,
    classify,
    decision_value,
    extract_hyperplane,
    functional_margin,
    geometric_margin,
    kernel_eval,
    load_model,
    save_model,
    train,
)
from .dataset_io import (
    Dataset,
    read_fcd_xml,
    read_trace_csv,
    sample_examples,
    split_disjoint,
    write_trace_csv,
)
from .eval_pipeline import EvaluationReport, accuracy_sweep, boundary_report, evaluate

__version__ = "0.1.0"
