from __future__ import annotations

from functools import lru_cache
from pathlib import Path

from prodint.cfg import CFG, build_cfg
from prodint.engine import AnalysisConfig, PowerSpec, parse_atoms
from prodint.numeric import BoolAbs, Parity
from prodint.parser import parse

CORPUS = Path(__file__).resolve().parents[1] / "corpus"
PROGRAMS = ("p31_init", "p32_guarded", "p33_offset3", "cc79_boolsign", "ccl11_packets")


def source(name: str) -> str:
    return (CORPUS / f"{name}.tiny").read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def load(name: str) -> CFG:
    return build_cfg(parse(source(name)))


def single(name: str, **kw) -> AnalysisConfig:
    return AnalysisConfig(domains=(name,), **kw)


def cartesian(a: str, b: str, **kw) -> AnalysisConfig:
    return AnalysisConfig(domains=(a, b), product="cartesian", **kw)


def reduced(a: str, b: str, *rules: str, granger: bool = False, **kw) -> AnalysisConfig:
    return AnalysisConfig(
        domains=(a, b), product="granger" if granger else "reduced", reductions=rules, **kw
    )


INTERVAL_DIFF = reduced("interval", "diff", "intervals-to-diff")
P33_POWER = AnalysisConfig(
    domains=("interval", "diff"),
    product="power",
    reductions=("intervals-to-diff",),
    power=PowerSpec("l", "interval", parse_atoms("interval", "(-inf,2];[3,+inf)")),
)
CC79_POWER = AnalysisConfig(
    domains=("sign",), product="power", power=PowerSpec("b", "bool", (BoolAbs.TT, BoolAbs.FF))
)
SCALAR_PARITY = reduced("interval", "parity", "interval-parity")

GENERIC_CONFIGS = {
    "interval": single("interval"),
    "parity": single("parity"),
    "sign": single("sign"),
    "congruence": single("congruence"),
    "bool": single("bool"),
    "diff": single("diff"),
    "cart-interval-diff": cartesian("interval", "diff"),
    "cart-interval-parity": cartesian("interval", "parity"),
    "cart-sign-bool": cartesian("sign", "bool"),
    "red-interval-diff": INTERVAL_DIFF,
    "granger-interval-diff": reduced("interval", "diff", "intervals-to-diff", granger=True),
    "red-interval-diff-backflow": reduced("interval", "diff", "intervals-to-diff", "diff-to-intervals"),
    "red-interval-parity": SCALAR_PARITY,
    "granger-interval-parity": reduced("interval", "parity", "interval-parity", granger=True),
    "red-interval-congruence": reduced("interval", "congruence", "interval-congruence"),
    "arrays-summary": reduced("interval", "parity", "interval-parity", arrays="summary"),
    "arrays-value-parity": reduced("interval", "parity", "interval-parity", arrays="value-parity"),
    "arrays-index-parity": reduced("interval", "parity", "interval-parity", arrays="index-parity"),
    "interval-delay-8": single("interval", widening_delay=8),
    "interval-with-ranges": single("interval", use_input_ranges=True),
}

_PARITY_ATOMS = (Parity.ODD, Parity.EVEN)
_L_ATOMS = parse_atoms("interval", "(-inf,2];[3,+inf)")

POWER_CONFIGS = {
    "p31_init": {
        "power-n-parity": AnalysisConfig(
            domains=("interval", "diff"), product="power", reductions=("intervals-to-diff",),
            power=PowerSpec("n", "parity", _PARITY_ATOMS),
        ),
        "power-i-intervals": AnalysisConfig(
            domains=("interval",), product="power",
            power=PowerSpec("i", "interval", parse_atoms("interval", "(-inf,0];[1,4];[5,+inf)")),
        ),
    },
    "p32_guarded": {
        "power-l-intervals": AnalysisConfig(
            domains=("interval", "diff"), product="power", reductions=("intervals-to-diff",),
            power=PowerSpec("l", "interval", parse_atoms("interval", "(-inf,0];[1,+inf)")),
        ),
    },
    "p33_offset3": {
        "power-l-intervals": P33_POWER,
        "power-l-cartesian": AnalysisConfig(
            domains=("interval", "diff"), product="power", power=PowerSpec("l", "interval", _L_ATOMS),
        ),
    },
    "cc79_boolsign": {
        "power-b-sign": CC79_POWER,
        "power-b-interval": AnalysisConfig(
            domains=("interval",), product="power", power=PowerSpec("b", "bool", (BoolAbs.TT, BoolAbs.FF)),
        ),
        "power-b-sign-bool": AnalysisConfig(
            domains=("sign", "bool"), product="power", power=PowerSpec("b", "bool", (BoolAbs.FF, BoolAbs.TT)),
        ),
    },
    "ccl11_packets": {
        "power-i-parity": AnalysisConfig(
            domains=("interval",), product="power", power=PowerSpec("i", "parity", _PARITY_ATOMS),
        ),
        "power-i-parity-arrays": AnalysisConfig(
            domains=("interval",), product="power", power=PowerSpec("i", "parity", _PARITY_ATOMS),
            arrays="index-parity",
        ),
    },
}


def all_configs():
    """(program, config name, config) for every corpus program and supported configuration."""
    for prog in PROGRAMS:
        for name, cfg in GENERIC_CONFIGS.items():
            yield prog, name, cfg
        for name, cfg in POWER_CONFIGS[prog].items():
            yield prog, name, cfg
