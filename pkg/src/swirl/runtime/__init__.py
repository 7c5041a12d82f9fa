"""Compilation of workflow systems into location programs and their execution."""

from .compiler import (
    Bundle,
    Endpoint,
    Metadata,
    MetadataError,
    MetadataMissing,
    Program,
    compile_system,
    load_metadata,
    metadata_from_dict,
    metadata_to_dict,
)
from .executor import (
    Deadlock,
    ExecutionReport,
    ReplayMismatch,
    StepFailure,
    merge_reports,
    parse_report,
    replay,
    run_inproc,
    synthesize,
)
from .tcp import ConnectionFailure, TcpOptions, run_location_tcp
from .wire import Frame, FrameCorruption, decode_frame, encode_frame

__all__ = [
    "Bundle",
    "ConnectionFailure",
    "Deadlock",
    "Endpoint",
    "ExecutionReport",
    "Frame",
    "FrameCorruption",
    "Metadata",
    "MetadataError",
    "MetadataMissing",
    "Program",
    "ReplayMismatch",
    "StepFailure",
    "TcpOptions",
    "compile_system",
    "decode_frame",
    "encode_frame",
    "load_metadata",
    "merge_reports",
    "metadata_from_dict",
    "metadata_to_dict",
    "parse_report",
    "replay",
    "run_inproc",
    "run_location_tcp",
    "synthesize",
]
