"""Biphoton time-tag simulation and correlation analysis."""

from ._core import (  # noqa: F401
    ConfigError,
    DetectorModel,
    EmptyAutoBinError,
    EmptyCurveError,
    Error,
    ExperimentConfig,
    FabryPerotFilter,
    FormatError,
    InvalidArgument,
    IoError,
    G2Matrix,
    Run,
    airy_transmission,
    brute_force_g2,
    cauchy_schwarz,
    coincidence_histogram,
    correlate,
    filter_alpha,
    load_config,
    load_curves,
    parse_config,
    read_tagfile,
    simulate,
    spectrum,
    write_tagfile,
)

__version__ = "0.1.0"
