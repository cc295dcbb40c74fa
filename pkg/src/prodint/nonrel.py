"""Environments ``var -> value`` over a non-relational value domain.

An untracked variable is implicitly top, so an environment never stores a
top binding, and any bottom binding collapses the whole environment to the
bottom environment. With that normal form structural equality is semantic
equality.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Any, Iterable, Mapping

from .lattice import Domain
from .numeric import (
    BOOL,
    CONGRUENCE,
    INTERVAL,
    PARITY,
    SIGN,
    BoolAbs,
    Congruence,
    Interval,
    ITOP,
    Parity,
    Sign,
    parity_of_congruence,
    parity_of_interval,
)
from .syntax import (
    SWAPPED,
    BoolConst,
    BoolVar,
    Cond,
    Expr,
    Not,
    Num,
    Rel,
    Var,
    compare,
    linear,
    negate,
    normalize,
)


class AnalysisError(Exception):
    pass


@dataclass(frozen=True)
class Env:
    items: tuple[tuple[str, Any], ...] = ()
    is_bottom: bool = False

    @cached_property
    def mapping(self) -> dict[str, Any]:
        return dict(self.items)

    def get(self, var: str, default: Any = None) -> Any:
        return self.mapping.get(var, default)

    def __contains__(self, var: str) -> bool:
        return var in self.mapping


ENV_BOTTOM = Env((), True)


def make_env(values: Domain, bindings: Mapping[str, Any] | Iterable[tuple[str, Any]]) -> Env:
    pairs = bindings.items() if isinstance(bindings, Mapping) else bindings
    kept = []
    top = values.top()
    for var, v in pairs:
        if values.is_bottom(v):
            return ENV_BOTTOM
        if v != top:
            kept.append((var, v))
    return Env(tuple(sorted(kept, key=lambda kv: kv[0])))


class EnvDomain(Domain):
    """Lattice of environments; the concrete points are stores (dicts)."""

    def __init__(self, values: Domain) -> None:
        self.values = values
        self.name = values.name
        self.has_finite_height = values.has_finite_height
        self.widening_is_join = values.widening_is_join

    value_type = Env

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.values.name})"

    def bottom(self) -> Env:
        return ENV_BOTTOM

    def top(self) -> Env:
        return Env()

    def is_bottom(self, a: Env) -> bool:
        return a.is_bottom

    def lookup(self, env: Env, var: str) -> Any:
        return env.get(var, self.values.top())

    def set(self, env: Env, var: str, value: Any) -> Env:
        if env.is_bottom:
            return env
        m = dict(env.mapping)
        m[var] = value
        return make_env(self.values, m)

    def drop(self, env: Env, var: str) -> Env:
        if env.is_bottom or var not in env:
            return env
        return Env(tuple(kv for kv in env.items if kv[0] != var))

    def leq(self, a: Env, b: Env) -> bool:
        self._own(a, b)
        if a.is_bottom:
            return True
        if b.is_bottom:
            return False
        return all(self.values.leq(self.lookup(a, x), v) for x, v in b.items)

    def _pointwise(self, op, a: Env, b: Env) -> Env:
        keys = a.mapping.keys() | b.mapping.keys()
        return make_env(self.values, ((x, op(self.lookup(a, x), self.lookup(b, x))) for x in keys))

    def join(self, a: Env, b: Env) -> Env:
        self._own(a, b)
        if a.is_bottom:
            return b
        if b.is_bottom:
            return a
        return self._pointwise(self.values.join, a, b)

    def meet(self, a: Env, b: Env) -> Env:
        self._own(a, b)
        if a.is_bottom or b.is_bottom:
            return ENV_BOTTOM
        return self._pointwise(self.values.meet, a, b)

    def widen(self, a: Env, b: Env) -> Env:
        self._own(a, b)
        if a.is_bottom:
            return b
        if b.is_bottom:
            return a
        return self._pointwise(self.values.widen, a, b)

    def contains(self, a: Env, store: Mapping[str, Any]) -> bool:
        if a.is_bottom:
            return False
        return all(x not in store or self.values.contains(v, store[x]) for x, v in a.items)

    def render(self, a: Env) -> str:
        if a.is_bottom:
            return "⊥"
        return "{" + ", ".join(f"{x} -> {v}" for x, v in a.items) + "}"

    # engine transfer protocol; statements on variables of another kind are no-ops
    def init(self, inputs: Mapping[str, tuple[int, int] | None]) -> Env:
        bindings = {}
        for var, rng in inputs.items():
            if rng is not None and hasattr(self.values, "alpha") and self.values is not BOOL:
                bindings[var] = self.values.alpha(range(rng[0], rng[1] + 1))
        return make_env(self.values, bindings)

    def assign(self, x: str, e: Expr, env: Env) -> Env:
        return env

    def bool_assign(self, x: str, c: Cond, env: Env) -> Env:
        return env

    def alloc(self, arr: str, length_var: str, e: Expr, env: Env) -> Env:
        return env

    def store(self, arr: str, index: Expr, value: Expr, env: Env) -> Env:
        return env

    def assume(self, c: Cond, env: Env) -> Env:
        return env

    def refine(self, c: Cond, env: Env) -> Env:
        return self.assume(c, env)

    def restrict(self, var: str, value: Any, env: Env) -> Env:
        if isinstance(value, self.values.value_type):
            return self.set(env, var, self.values.meet(self.lookup(env, var), value))
        return env

    def entails(self, c: Cond, env: Env) -> bool:
        return self.is_bottom(self.assume(negate(c), env))

    def interval_of(self, e: Expr, env: Env) -> Interval:
        return ITOP

    def parity_of(self, e: Expr, env: Env) -> Parity:
        return Parity.TOP


class NumEnvDomain(EnvDomain):
    """Environments of integer variables over Interval, Parity, Sign or Congruence."""

    def eval(self, e: Expr, env: Env, strict: bool = False) -> Any:
        vals = self.values
        if env.is_bottom:
            return vals.bottom()
        lin = linear(e)
        if lin is not None and lin[0] is not None:
            return vals.add_const(self._var(lin[0], env, strict), lin[1])
        if isinstance(e, Num):
            return vals.const(e.value)
        if isinstance(e, Var):
            return self._var(e.name, env, strict)
        left = self.eval(e.left, env, strict)
        if isinstance(e.right, Num):
            k = e.right.value
            return vals.add_const(left, k if e.op == "+" else -k)
        right = self.eval(e.right, env, strict)
        if e.op == "-":
            right = vals.neg(right)
        return vals.add(left, right)

    def _var(self, name: str, env: Env, strict: bool) -> Any:
        if strict and name not in env:
            raise AnalysisError(f"unbound variable {name!r}")
        return self.lookup(env, name)

    def assign(self, x: str, e: Expr, env: Env) -> Env:
        if env.is_bottom:
            return env
        return self.set(env, x, self.eval(e, env))

    def alloc(self, arr: str, length_var: str, e: Expr, env: Env) -> Env:
        if env.is_bottom:
            return env
        return self.set(env, length_var, self.values.refine_const(self.eval(e, env), ">=", 0))

    def assume(self, c: Cond, env: Env) -> Env:
        if env.is_bottom:
            return env
        c = normalize(c)
        if isinstance(c, BoolConst):
            return env if c.value else ENV_BOTTOM
        if not isinstance(c, Rel):
            return env
        vals, op = self.values, c.op
        ll, lr = linear(c.left), linear(c.right)
        if ll is None or lr is None:
            a, b = vals.refine_pair(self.eval(c.left, env), self.eval(c.right, env), op, 0)
            return ENV_BOTTOM if vals.is_bottom(a) or vals.is_bottom(b) else env
        (x, a), (y, b) = ll, lr
        if x is None and y is None or x == y:
            return env if compare(op, a, b) else ENV_BOTTOM
        if y is None:
            return self.set(env, x, vals.refine_const(self.lookup(env, x), op, b - a))
        if x is None:
            return self.set(env, y, vals.refine_const(self.lookup(env, y), SWAPPED[op], a - b))
        xv, yv = vals.refine_pair(self.lookup(env, x), self.lookup(env, y), op, b - a)
        return self.set(self.set(env, x, xv), y, yv)

    def interval_of(self, e: Expr, env: Env) -> Interval:
        return self.values.to_interval(self.eval(e, env))

    def parity_of(self, e: Expr, env: Env) -> Parity:
        v = self.eval(e, env)
        if isinstance(v, Parity):
            return v
        if isinstance(v, Interval):
            return parity_of_interval(v)
        if isinstance(v, Congruence):
            return parity_of_congruence(v)
        if v == Sign.BOT:
            return Parity.BOT
        return Parity.EVEN if v == Sign.ZERO else Parity.TOP


class BoolEnvDomain(EnvDomain):
    """Environments of boolean variables over BoolAbs."""

    def __init__(self) -> None:
        super().__init__(BOOL)

    def eval_cond(self, c: Cond, env: Env) -> BoolAbs:
        if env.is_bottom:
            return BoolAbs.BOT
        c = normalize(c)
        if isinstance(c, BoolConst):
            return BOOL.const(c.value)
        if isinstance(c, BoolVar):
            return self.lookup(env, c.name)
        if isinstance(c, Not):
            return BOOL.negate(self.eval_cond(c.cond, env))
        ll, lr = linear(c.left), linear(c.right)
        if ll and lr and ll[0] == lr[0]:
            return BOOL.const(compare(c.op, ll[1], lr[1]))
        return BoolAbs.TOP

    def bool_assign(self, x: str, c: Cond, env: Env) -> Env:
        if env.is_bottom:
            return env
        return self.set(env, x, self.eval_cond(c, env))

    def assume(self, c: Cond, env: Env) -> Env:
        if env.is_bottom:
            return env
        c = normalize(c)
        if isinstance(c, BoolConst):
            return env if c.value else ENV_BOTTOM
        if isinstance(c, BoolVar):
            return self.set(env, c.name, BOOL.meet(self.lookup(env, c.name), BoolAbs.TT))
        if isinstance(c, Not) and isinstance(c.cond, BoolVar):
            name = c.cond.name
            return self.set(env, name, BOOL.meet(self.lookup(env, name), BoolAbs.FF))
        return env


INTERVAL_ENV = NumEnvDomain(INTERVAL)
PARITY_ENV = NumEnvDomain(PARITY)
SIGN_ENV = NumEnvDomain(SIGN)
CONGRUENCE_ENV = NumEnvDomain(CONGRUENCE)
BOOL_ENV = BoolEnvDomain()


def _env(d: EnvDomain, env: Mapping[str, Any] | Env) -> Env:
    return env if isinstance(env, Env) else make_env(d.values, env)


def interval_eval(e: Expr, env: Mapping[str, Interval]) -> Interval:
    return INTERVAL_ENV.eval(e, _strict_env(INTERVAL_ENV, env), strict=True)


def parity_eval(e: Expr, env: Mapping[str, Parity]) -> Parity:
    return PARITY_ENV.eval(e, _strict_env(PARITY_ENV, env), strict=True)


def sign_eval(e: Expr, env: Mapping[str, Sign]) -> Sign:
    return SIGN_ENV.eval(e, _strict_env(SIGN_ENV, env), strict=True)


def congruence_eval(e: Expr, env: Mapping[str, Congruence]) -> Congruence:
    return CONGRUENCE_ENV.eval(e, _strict_env(CONGRUENCE_ENV, env), strict=True)


class _StrictEnv(Env):
    """Env that remembers explicitly bound top values (for unbound-variable errors)."""


def _strict_env(d: NumEnvDomain, env: Mapping[str, Any]) -> Env:
    for v in env.values():
        if d.values.is_bottom(v):
            return ENV_BOTTOM
    return _StrictEnv(tuple(sorted(env.items())))


def _assume_public(d: NumEnvDomain, c: Cond, env: Mapping[str, Any]) -> dict[str, Any] | None:
    """Refine ``env`` by ``c``; ``None`` stands for bottom. Unrefined bindings are kept."""
    out = d.assume(c, _env(d, env))
    if out.is_bottom:
        return None
    result = dict(env)
    for x in result:
        result[x] = d.lookup(out, x)
    result.update(out.mapping)
    return result


def interval_assume(c: Cond, env: Mapping[str, Interval]) -> dict[str, Interval] | None:
    return _assume_public(INTERVAL_ENV, c, env)


def sign_assume(c: Cond, env: Mapping[str, Sign]) -> dict[str, Sign] | None:
    return _assume_public(SIGN_ENV, c, env)


def bool_eval_cond(c: Cond, env: Mapping[str, Any] | Env, domain: NumEnvDomain | None = None) -> BoolAbs:
    """Abstract truth value of ``c`` under a Sign or Interval environment."""
    if domain is None:
        sample = next(iter(env.values()), None) if isinstance(env, Mapping) else None
        domain = SIGN_ENV if isinstance(sample, Sign) else INTERVAL_ENV
    e = _env(domain, env)
    if e.is_bottom:
        return BoolAbs.BOT
    can_hold = not domain.assume(c, e).is_bottom
    can_fail = not domain.assume(negate(c), e).is_bottom
    if can_hold and can_fail:
        return BoolAbs.TOP
    if can_hold:
        return BoolAbs.TT
    if can_fail:
        return BoolAbs.FF
    return BoolAbs.BOT
