"""Python bindings for the qconv hybrid quantum-classical CNN library."""

from ._qconv import (
    AnsatzKind,
    Circuit,
    QconvError,
    build_ansatz,
    confusion_matrix,
    encode_window,
    expectation,
    finite_difference_gradient,
    load_experiment_config_json,
    noisy_expectation,
    savgol_baseline,
    shift_rule_gradient,
    smoothness_stats,
    train_from_config,
)

__all__ = [
    "AnsatzKind",
    "Circuit",
    "QconvError",
    "build_ansatz",
    "confusion_matrix",
    "encode_window",
    "expectation",
    "finite_difference_gradient",
    "load_experiment_config_json",
    "noisy_expectation",
    "savgol_baseline",
    "shift_rule_gradient",
    "smoothness_stats",
    "train_from_config",
]
