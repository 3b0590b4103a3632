"""Belief-propagation slot and channel allocation for tree-routed sensor networks."""

from .bp import Allocation, BpConfig, check_validity, run, run_batch
from .datasets import fig1_network, fig2_network, generate_topology
from .estimator import ChannelAllocator, InterferenceDetector
from .experiments import ExperimentConfig, OutageCurve, run_allocate, run_outage
from .factors import FactorGraph, build_factor_graph, choose_n_slots, prepare
from .network import (
    NetworkModel,
    RadioModel,
    Terminal,
    build_relations,
    detect_interferers,
    load_topology,
    save_topology,
    verify_schedule,
)
from .oracle import enumerate_valid, find_valid

__version__ = "0.1.0"

__all__ = [
    "Allocation",
    "BpConfig",
    "ChannelAllocator",
    "ExperimentConfig",
    "FactorGraph",
    "InterferenceDetector",
    "NetworkModel",
    "OutageCurve",
    "RadioModel",
    "Terminal",
    "build_factor_graph",
    "build_relations",
    "check_validity",
    "choose_n_slots",
    "detect_interferers",
    "enumerate_valid",
    "fig1_network",
    "fig2_network",
    "find_valid",
    "generate_topology",
    "load_topology",
    "prepare",
    "run",
    "run_allocate",
    "run_batch",
    "run_outage",
    "save_topology",
    "verify_schedule",
]
