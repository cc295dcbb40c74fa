"""Worklist fixpoint engine over a CFG for a configured domain or product."""

from __future__ import annotations

import heapq
import os
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Any

from .arrays import ARRAY_MODES, WithArrays
from .cfg import CFG, Edge, Obligation
from .diff import DiffDomain
from .lattice import Counting, Domain
from .nonrel import (
    BOOL_ENV,
    CONGRUENCE_ENV,
    INTERVAL_ENV,
    PARITY_ENV,
    SIGN_ENV,
    AnalysisError,
)
from .numeric import BOOL, INF, INTERVAL, PARITY, BoolAbs, Interval, Parity
from .products import (
    Cartesian,
    Reduced,
    ReductionRule,
    StatePower,
    compose_rules,
    intervals_to_diff_rule,
    lift_rule,
    rho_interval_congruence,
    rho_interval_parity,
)
from .syntax import Alloc, Assign, BoolAssign, Store, length_var

DOMAIN_ORDER = ("interval", "parity", "sign", "congruence", "bool", "diff")
PRODUCTS = ("none", "cartesian", "reduced", "granger", "power")
EXPONENTS = ("parity", "bool", "interval")
DEFAULT_CAP = 10_000

# rule name -> (left domain, right domain)
REDUCTIONS = {
    "interval-parity": ("interval", "parity"),
    "interval-congruence": ("interval", "congruence"),
    "intervals-to-diff": ("interval", "diff"),
    "diff-to-intervals": ("interval", "diff"),
}


def _env_domain(name: str) -> Domain:
    table = {
        "interval": INTERVAL_ENV,
        "parity": PARITY_ENV,
        "sign": SIGN_ENV,
        "congruence": CONGRUENCE_ENV,
        "bool": BOOL_ENV,
    }
    if name == "diff":
        return DiffDomain()
    return table[name]


def _rule(name: str) -> ReductionRule:
    if name == "interval-parity":
        return lift_rule(rho_interval_parity(), INTERVAL_ENV, PARITY_ENV)
    if name == "interval-congruence":
        return lift_rule(rho_interval_congruence(), INTERVAL_ENV, CONGRUENCE_ENV)
    if name == "intervals-to-diff":
        return intervals_to_diff_rule()
    return intervals_to_diff_rule(backflow=True)


@dataclass(frozen=True)
class PowerSpec:
    pivot: str
    exponent: str  # "parity", "bool" or "interval"
    atoms: tuple

    def __post_init__(self) -> None:
        if self.exponent not in EXPONENTS:
            raise ValueError(f"unknown exponent {self.exponent!r}")
        if not self.atoms:
            raise ValueError("power needs a non-empty list of atoms")

    def exponent_domain(self) -> Domain:
        return {"parity": PARITY, "bool": BOOL, "interval": INTERVAL}[self.exponent]


@dataclass(frozen=True)
class AnalysisConfig:
    domains: tuple[str, ...] = ("interval",)
    product: str = "none"
    reductions: tuple[str, ...] = ()
    power: PowerSpec | None = None
    widening_delay: int = 1
    arrays: str | None = None
    use_input_ranges: bool = False

    def __post_init__(self) -> None:
        for d in self.domains:
            if d not in DOMAIN_ORDER:
                raise ValueError(f"unknown domain {d!r}")
        if len(set(self.domains)) != len(self.domains) or not self.domains:
            raise ValueError("domains must be a non-empty list without repetitions")
        object.__setattr__(self, "domains", tuple(sorted(self.domains, key=DOMAIN_ORDER.index)))
        if self.product not in PRODUCTS:
            raise ValueError(f"unknown product {self.product!r}")
        for r in self.reductions:
            if r not in REDUCTIONS:
                raise ValueError(f"unknown reduction {r!r}")
            if set(REDUCTIONS[r]) != set(self.domains):
                raise ValueError(f"reduction {r!r} needs exactly the domains {REDUCTIONS[r]}")
        if self.product == "none" and len(self.domains) != 1:
            raise ValueError("product 'none' takes exactly one domain")
        if self.product in ("cartesian", "reduced", "granger") and len(self.domains) != 2:
            raise ValueError(f"product {self.product!r} combines exactly two domains")
        if self.product in ("reduced", "granger") and not self.reductions:
            raise ValueError(f"product {self.product!r} needs at least one reduction")
        if self.product == "power":
            if self.power is None:
                raise ValueError("product 'power' needs a pivot and atoms")
            if len(self.domains) > 2:
                raise ValueError("the power base combines at most two domains")
        if self.widening_delay < 0:
            raise ValueError("widening delay must be non-negative")
        if self.arrays is not None and self.arrays not in ARRAY_MODES:
            raise ValueError(f"unknown array mode {self.arrays!r}")

    def describe(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "domains": list(self.domains),
            "product": self.product,
            "reductions": list(self.reductions),
            "widening_delay": self.widening_delay,
        }
        if self.power is not None:
            out["power"] = {
                "pivot": self.power.pivot,
                "exponent": self.power.exponent,
                "atoms": [str(a) for a in self.power.atoms],
            }
        if self.arrays:
            out["arrays"] = self.arrays
        return out


def build_domain(config: AnalysisConfig, counters: dict[str, Counter] | None = None) -> Domain:
    """Assemble the state domain; with ``counters`` the relevant domains count their operations."""

    def counted(d: Domain, key: str) -> Any:
        if counters is None:
            return d
        return Counting(d, counters.setdefault(key, Counter()))

    def pair(granger: bool, count_parts: bool) -> Domain:
        comps = [_env_domain(n) for n in config.domains]
        if count_parts:
            comps = [counted(c, n) for c, n in zip(comps, config.domains)]
        if len(comps) == 1:
            return comps[0]
        if config.reductions:
            rule = compose_rules([_rule(r) for r in config.reductions])
            return Reduced(comps[0], comps[1], rule, granger=granger)
        return Cartesian(comps[0], comps[1], smash=True)

    if config.product == "power":
        spec = config.power
        base = counted(pair(granger=False, count_parts=False), "base")
        d: Domain = StatePower(base, spec.pivot, spec.exponent_domain(), spec.atoms)
    else:
        d = pair(granger=config.product == "granger", count_parts=True)
    if config.arrays:
        d = WithArrays(d, config.arrays)
    return d


@dataclass
class ObligationResult:
    obligation: Obligation
    verdict: str  # "PROVED" or "UNKNOWN"

    @property
    def line(self) -> int:
        return self.obligation.line

    @property
    def col(self) -> int:
        return self.obligation.col

    @property
    def kind(self) -> str:
        return self.obligation.kind


@dataclass
class AnalysisResult:
    cfg: CFG
    config: AnalysisConfig
    domain: Domain
    states: dict[int, Any]
    obligations: list[ObligationResult]
    iterations: int
    counters: dict[str, Counter] = field(default_factory=dict)

    def at(self, node: int) -> Any:
        return self.states[node]

    def after(self, line: int) -> Any:
        return self.states[self.cfg.point_after(line)]

    def before(self, line: int) -> Any:
        return self.states[self.cfg.point_before(line)]

    def head(self, line: int) -> Any:
        return self.states[self.cfg.loop_head(line)]

    @property
    def exit_state(self) -> Any:
        return self.states[self.cfg.exit]

    def verdicts(self) -> list[tuple[int, int, str, str]]:
        return [(o.line, o.col, o.kind, o.verdict) for o in self.obligations]

    def all_proved(self) -> bool:
        return all(o.verdict == "PROVED" for o in self.obligations)

    def render(self, node: int) -> str:
        return self.domain.render(self.states[node])


def transfer(d: Domain, e: Edge, s: Any) -> Any:
    if d.is_bottom(s):
        return s
    if e.kind == "skip":
        return s
    if e.kind in ("guard", "assert"):
        return d.assume(e.payload, s)
    st = e.payload
    if isinstance(st, Assign):
        return d.assign(st.target, st.expr, s)
    if isinstance(st, BoolAssign):
        return d.bool_assign(st.target, st.cond, s)
    if isinstance(st, Alloc):
        return d.alloc(st.target, length_var(st.target), st.length, s)
    if isinstance(st, Store):
        return d.store(st.array, st.index, st.value, s)
    raise TypeError(f"unexpected edge payload {st!r}")


def _cap() -> int:
    raw = os.environ.get("PRODINT_CAP")
    if raw is None:
        return DEFAULT_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise AnalysisError(f"PRODINT_CAP must be an integer, got {raw!r}") from None
    if cap < 1:
        raise AnalysisError("PRODINT_CAP must be positive")
    return cap


def _initial(d: Domain, cfg: CFG, config: AnalysisConfig) -> Any:
    inputs = {i.name: ((i.lo, i.hi) if config.use_input_ranges else None) for i in cfg.inputs}
    return d.init(inputs)


def fixpoint(
    cfg: CFG, d: Domain, config: AnalysisConfig, stats: Counter | None = None
) -> tuple[dict[int, Any], int]:
    """Least post-fixpoint with widening; ``stats`` counts transfers per edge kind."""
    order = {n: k for k, n in enumerate(cfg.rpo())}
    out_edges = {n: cfg.succ(n) for n in cfg.nodes}
    states = {n: d.bottom() for n in cfg.nodes}
    states[cfg.entry] = _initial(d, cfg, config)
    updates = Counter()
    queue = [(order[cfg.entry], cfg.entry)]
    queued = {cfg.entry}
    cap, visits = _cap(), 0
    while queue:
        _, n = heapq.heappop(queue)
        queued.discard(n)
        visits += 1
        if visits > cap:
            raise AnalysisError(f"no fixpoint after {cap} node visits")
        for e in out_edges[n]:
            if stats is not None and not d.is_bottom(states[n]):
                stats[e.kind] += 1
            post = transfer(d, e, states[n])
            if d.is_bottom(post):
                continue
            old = states[e.dst]
            if d.leq(post, old):
                continue
            new = d.join(old, post)
            if e.dst in cfg.loop_heads:
                updates[e.dst] += 1
                if updates[e.dst] > config.widening_delay:
                    new = d.widen(old, new)
            states[e.dst] = new
            if e.dst not in queued:
                heapq.heappush(queue, (order[e.dst], e.dst))
                queued.add(e.dst)
    return states, visits


def check_postfixpoint(cfg: CFG, d: Domain, states: dict[int, Any]) -> list[Edge]:
    """Edges whose transfer escapes the stored target state (empty on a post-fixpoint)."""
    return [e for e in cfg.edges if not d.leq(transfer(d, e, states[e.src]), states[e.dst])]


def _verdict(d: Domain, ob: Obligation, s: Any) -> str:
    if d.is_bottom(s) or d.entails(ob.cond, s):
        return "PROVED"
    return "UNKNOWN"


def analyze(
    cfg: CFG,
    config: AnalysisConfig | None = None,
    *,
    count: bool = False,
    domain: Domain | None = None,
) -> AnalysisResult:
    """Run the analysis; ``domain`` replaces the one ``config`` would build."""
    config = config or AnalysisConfig()
    counters: dict[str, Counter] | None = {} if count else None
    d = domain if domain is not None else build_domain(config, counters)
    if counters is not None:
        counters["engine"] = Counter()
    states, visits = fixpoint(cfg, d, config, counters["engine"] if counters is not None else None)
    obligations = [ObligationResult(ob, _verdict(d, ob, states[ob.node])) for ob in cfg.obligations]
    return AnalysisResult(cfg, config, d, states, obligations, visits, counters or {})


def analyze_array_power(cfg: CFG, mode: str, config: AnalysisConfig | None = None) -> AnalysisResult:
    """Analysis with array cells partitioned by ``mode`` ('value-parity' or 'index-parity')."""
    if mode not in ("value-parity", "index-parity"):
        raise ValueError(f"unknown array power mode {mode!r}")
    config = config or AnalysisConfig(
        domains=("interval", "parity"), product="reduced", reductions=("interval-parity",)
    )
    return analyze(cfg, _with_arrays(config, mode))


def _with_arrays(config: AnalysisConfig, mode: str) -> AnalysisConfig:
    return AnalysisConfig(
        domains=config.domains,
        product=config.product,
        reductions=config.reductions,
        power=config.power,
        widening_delay=config.widening_delay,
        arrays=mode,
        use_input_ranges=config.use_input_ranges,
    )


def parse_atoms(exponent: str, text: str) -> tuple:
    """Read ``"(-inf,2];[3,+inf)"``, ``"odd;even"`` or ``"true;false"`` into exponent atoms."""
    parts = [p.strip() for p in text.split(";") if p.strip()]
    if not parts:
        raise ValueError("empty atom list")
    if exponent == "parity":
        names = {"odd": Parity.ODD, "o": Parity.ODD, "even": Parity.EVEN, "e": Parity.EVEN}
        return tuple(_lookup(names, p) for p in parts)
    if exponent == "bool":
        names = {"true": BoolAbs.TT, "tt": BoolAbs.TT, "false": BoolAbs.FF, "ff": BoolAbs.FF}
        return tuple(_lookup(names, p) for p in parts)
    return tuple(_interval_atom(p) for p in parts)


def _lookup(names: dict, key: str):
    if key.lower() not in names:
        raise ValueError(f"unknown atom {key!r}")
    return names[key.lower()]


def _interval_atom(text: str) -> Interval:
    m = re.fullmatch(r"([\[(])\s*([+-]?(?:inf|\d+))\s*(?:,|\.\.)\s*([+-]?(?:inf|\d+))\s*([\])])", text)
    if m is None:
        raise ValueError(f"malformed interval atom {text!r}")
    lo_open, lo, hi, hi_open = m.group(1) == "(", m.group(2), m.group(3), m.group(4) == ")"

    def bound(b: str) -> float | int:
        if b.lstrip("+-") == "inf":
            return -INF if b.startswith("-") else INF
        return int(b)

    a, b = bound(lo), bound(hi)
    if lo_open and a != -INF:
        a += 1
    if hi_open and b != INF:
        b -= 1
    if a == INF or b == -INF or a > b:
        raise ValueError(f"empty interval atom {text!r}")
    return Interval(a, b)

