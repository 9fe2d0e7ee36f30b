"""Design-based subgroup analysis for randomized trials."""

import json as _json

from ._core import (
    AnalyzeArtifacts,
    ConfigError,
    DataParseError,
    DomainError,
    EstimationError,
    ProbeArtifacts,
    SimulateArtifacts,
    __version__,
    analyze,
    bell_mccaffrey_df,
    expected_inverse_arm_size,
    phi_correction,
    probe,
    se_ratio_actual_vs_expected,
    simulate,
    split_probability,
)


def analyze_report(csv_text, config_text, data_label="<memory>"):
    """Run analyze() and return the report parsed into a dict."""
    return _json.loads(analyze(csv_text, config_text, data_label).json)


def simulate_report(config_text, threads=0):
    """Run simulate() and return the report parsed into a dict."""
    return _json.loads(simulate(config_text, threads).json)


__all__ = [
    "AnalyzeArtifacts",
    "ConfigError",
    "DataParseError",
    "DomainError",
    "EstimationError",
    "ProbeArtifacts",
    "SimulateArtifacts",
    "__version__",
    "analyze",
    "analyze_report",
    "bell_mccaffrey_df",
    "expected_inverse_arm_size",
    "phi_correction",
    "probe",
    "se_ratio_actual_vs_expected",
    "simulate",
    "simulate_report",
    "split_probability",
]
