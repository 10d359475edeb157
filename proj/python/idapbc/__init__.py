"""Sparse IDA-PBC controller synthesis for port-Hamiltonian systems.

Thin Python facade over the C++ core: training, simulation, monodromy
analysis, and expression export all operate on the same YAML configs and JSON
model checkpoints as the `idapbc` command-line tool.
"""

from ._core import (
    CheckpointError,
    ConfigError,
    DivergenceError,
    analyze_model,
    check_matching,
    eigenvalues,
    export_model,
    matrix_exponential,
    run_cli,
    simulate_model,
    train_yaml,
    validate_config,
)

__all__ = [
    "CheckpointError",
    "ConfigError",
    "DivergenceError",
    "analyze_model",
    "check_matching",
    "eigenvalues",
    "export_model",
    "matrix_exponential",
    "run_cli",
    "simulate_model",
    "train_yaml",
    "validate_config",
]
