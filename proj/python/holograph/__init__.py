"""Diffractive optical network trainer for graph node classification."""

from ._core import (
    ComplexField,
    ConfigError,
    EpochMetrics,
    EvalOutcome,
    FormatError,
    GradCheckReport,
    GridSpec,
    NumericError,
    ParseError,
    PhaseMask,
    PrepOutcome,
    RunConfig,
    SkipChannel,
    SweepOutcome,
    TrainOutcome,
    ablate,
    build_setup,
    dump_run_config,
    evaluate,
    explore,
    field_energy,
    gradcheck,
    intensity,
    parse_run_config,
    parse_run_config_text,
    prep,
    propagate,
    synth,
    train,
)

__all__ = [
    "ComplexField",
    "ConfigError",
    "EpochMetrics",
    "EvalOutcome",
    "FormatError",
    "GradCheckReport",
    "GridSpec",
    "NumericError",
    "ParseError",
    "PhaseMask",
    "PrepOutcome",
    "RunConfig",
    "SkipChannel",
    "SweepOutcome",
    "TrainOutcome",
    "ablate",
    "build_setup",
    "dump_run_config",
    "evaluate",
    "explore",
    "field_energy",
    "gradcheck",
    "intensity",
    "parse_run_config",
    "parse_run_config_text",
    "prep",
    "propagate",
    "synth",
    "train",
]
