"""Collecting semantics by exhaustive execution, and the soundness check against it.

Stores are dicts from variable names to ints, bools, or (for arrays) tuples
whose unwritten cells are ``None``. A run stops at the first runtime error:
out-of-bounds store, negative allocation size, failed assertion, or a read of
an unset variable.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any

from .cfg import CFG
from .engine import AnalysisResult
from .syntax import (
    Alloc,
    Assign,
    BoolAssign,
    Store,
    eval_cond,
    eval_expr,
    length_var,
    show_cond,
)

Frozen = tuple[tuple[str, Any], ...]


def freeze(store: dict[str, Any]) -> Frozen:
    return tuple(sorted(store.items()))


class RuntimeFault(Exception):
    pass


@dataclass
class Collected:
    stores: dict[int, set[Frozen]]
    errors: list[tuple[dict[str, int], str]] = field(default_factory=list)
    partial: bool = False
    steps: int = 0

    def at(self, node: int) -> list[dict[str, Any]]:
        return [dict(s) for s in sorted(self.stores.get(node, ()), key=repr)]


def _step(edge, store: dict[str, Any]) -> dict[str, Any] | None:
    """Successor store along ``edge``; None when a guard does not hold."""
    try:
        if edge.kind == "skip":
            return store
        if edge.kind == "guard":
            return store if eval_cond(edge.payload, store) else None
        if edge.kind == "assert":
            if not eval_cond(edge.payload, store):
                raise RuntimeFault(f"assertion {show_cond(edge.payload)} failed")
            return store
        st = edge.payload
        out = dict(store)
        if isinstance(st, Assign):
            out[st.target] = eval_expr(st.expr, store)
        elif isinstance(st, BoolAssign):
            out[st.target] = eval_cond(st.cond, store)
        elif isinstance(st, Alloc):
            n = eval_expr(st.length, store)
            if n < 0:
                raise RuntimeFault(f"negative array size {n}")
            out[st.target] = (None,) * n
            out[length_var(st.target)] = n
        elif isinstance(st, Store):
            cells = store[st.array]
            i = eval_expr(st.index, store)
            if not 0 <= i < len(cells):
                raise RuntimeFault(f"index {i} out of bounds for {st.array}[{len(cells)}]")
            v = eval_expr(st.value, store)
            out[st.array] = cells[:i] + (v,) + cells[i + 1:]
        return out
    except KeyError as exc:
        raise RuntimeFault(f"read of unset variable {exc.args[0]!r}") from None


def collect_concrete(cfg: CFG, step_bound: int = 10_000) -> Collected:
    """Run the program on every input tuple, recording the store at each visited node.

    ``step_bound`` limits the number of edges taken over all runs together;
    once it is exhausted the result is marked partial.
    """
    names = [d.name for d in cfg.inputs]
    ranges = [range(d.lo, d.hi + 1) for d in cfg.inputs]
    succ = {n: cfg.succ(n) for n in cfg.nodes}
    out = Collected(defaultdict(set))
    for values in itertools.product(*ranges):
        store: dict[str, Any] = dict(zip(names, values))
        node = cfg.entry
        while True:
            out.stores[node].add(freeze(store))
            if out.steps >= step_bound:
                out.partial = True
                return out
            nxt = None
            try:
                for e in succ[node]:
                    s = _step(e, store)
                    if s is not None:
                        nxt = (e.dst, s)
                        break
            except RuntimeFault as exc:
                out.errors.append((dict(zip(names, values)), str(exc)))
                break
            if nxt is None:
                break
            out.steps += 1
            node, store = nxt
    return out


@dataclass
class SoundnessReport:
    checked: int = 0
    violations: list[tuple[int, dict[str, Any], str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_soundness(result: AnalysisResult, collected: Collected) -> SoundnessReport:
    """Every collected store must lie in its node's abstract state, and PROVED must hold."""
    report = SoundnessReport()
    d = result.domain
    for node, stores in collected.stores.items():
        state = result.states[node]
        for frozen in stores:
            report.checked += 1
            store = dict(frozen)
            if not d.contains(state, store):
                report.violations.append((node, store, f"store outside {d.render(state)}"))
    for ob in result.obligations:
        if ob.verdict != "PROVED":
            continue
        for frozen in collected.stores.get(ob.obligation.node, ()):
            store = dict(frozen)
            try:
                holds = eval_cond(ob.obligation.cond, store)
            except KeyError:
                holds = False
            if not holds:
                report.violations.append(
                    (ob.obligation.node, store, f"{ob.obligation.describe()} proved but fails")
                )
    return report
