"""Distributed workflow instances, their SWIRL encoding, analysis and execution."""

from .bisim import check_theorem1, weak_barbed_bisim
from .encode import encode
from .generators import GenomeParams, fig1_instance, gen_1000genomes
from .model import DistributedWorkflowInstance, Workflow, load_instance
from .optimize import comm_stats, optimize
from .semantics import check_church_rosser, reachable_lts, run_to_quiescence
from .syntax import parse_swirl, render_swirl

__all__ = [
    "DistributedWorkflowInstance",
    "GenomeParams",
    "Workflow",
    "check_church_rosser",
    "check_theorem1",
    "comm_stats",
    "encode",
    "fig1_instance",
    "gen_1000genomes",
    "load_instance",
    "optimize",
    "parse_swirl",
    "reachable_lts",
    "render_swirl",
    "run_to_quiescence",
    "weak_barbed_bisim",
]
