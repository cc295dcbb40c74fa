"""Product abstract domains (Cartesian, reduced, reduced cardinal power) and an analyzer using them."""

from __future__ import annotations

from .cfg import CFG, build_cfg
from .concrete import check_soundness, collect_concrete
from .engine import AnalysisConfig, AnalysisResult, PowerSpec, analyze, analyze_array_power
from .lattice import Domain, FiniteUniverse, check_laws
from .parser import ParseError, parse, render

__all__ = [
    "AnalysisConfig",
    "AnalysisResult",
    "CFG",
    "Domain",
    "FiniteUniverse",
    "ParseError",
    "PowerSpec",
    "analyze",
    "analyze_array_power",
    "build_cfg",
    "check_laws",
    "check_soundness",
    "collect_concrete",
    "parse",
    "render",
]
