"""Tokenizer, recursive-descent parser and pretty-printer for ``.tiny`` programs."""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from .syntax import (
    Alloc,
    Assert,
    Assign,
    BinOp,
    BoolAssign,
    BoolConst,
    BoolVar,
    Cond,
    Expr,
    For,
    If,
    Input,
    Not,
    Num,
    Pos,
    Program,
    Rel,
    Stmt,
    Store,
    Var,
    While,
    length_var,
    show_cond,
    show_expr,
)

KEYWORDS = {"input", "in", "if", "else", "while", "for", "assert", "new", "Int", "true", "false"}
RELATIONS = ("<=", ">=", "<", ">", "=")


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int) -> None:
        super().__init__(f"{line}:{col}: {message}")
        self.message, self.line, self.col = message, line, col


@dataclass(frozen=True)
class Token:
    kind: str  # INT, ID, KW, SYM, EOF
    text: str
    line: int
    col: int

    @property
    def pos(self) -> Pos:
        return (self.line, self.col)


_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<nl>\n)|(?P<int>\d+)|(?P<id>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<sym>:=|<=|>=|\.length\b|[<>=!;,\[\](){}+\-−])"
)


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    line, start, i = 1, 0, 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None:
            raise ParseError(f"unexpected character {text[i]!r}", line, i - start + 1)
        col = i - start + 1
        kind = m.lastgroup
        if kind == "nl":
            line, start = line + 1, m.end()
        elif kind == "int":
            out.append(Token("INT", m.group(), line, col))
        elif kind == "id":
            word = m.group()
            out.append(Token("KW" if word in KEYWORDS else "ID", word, line, col))
        elif kind == "sym":
            sym = "-" if m.group() == "−" else m.group()
            out.append(Token("SYM", sym, line, col))
        i = m.end()
    out.append(Token("EOF", "", line, len(text) - start + 1))
    return out


class _Parser:
    def __init__(self, text: str) -> None:
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, what: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        found = tok.text or "end of input"
        return ParseError(f"expected {what}, found {found!r}", tok.line, tok.col)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("SYM", "KW") and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(repr(text))
        return self.advance()

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def ident(self) -> Token:
        if self.tok.kind != "ID":
            raise self.error("an identifier")
        return self.advance()

    def integer(self) -> int:
        neg = False
        if self.at("-"):
            self.advance()
            neg = True
        if self.tok.kind != "INT":
            raise self.error("an integer")
        v = int(self.advance().text)
        return -v if neg else v

    # grammar
    def program(self) -> Program:
        decls = []
        while self.at("input"):
            decls.append(self.decl())
        body = []
        while self.tok.kind != "EOF":
            body.append(self.stmt())
        return Program(tuple(decls), tuple(body))

    def decl(self) -> Input:
        kw = self.expect("input")
        name = self.ident().text
        self.expect("in")
        self.expect("[")
        lo = self.integer()
        self.expect(",")
        hi = self.integer()
        self.expect("]")
        self.expect(";")
        if lo > hi:
            raise ParseError(f"empty input range [{lo},{hi}]", kw.line, kw.col)
        return Input(name, lo, hi, kw.pos)

    def block(self) -> tuple[Stmt, ...]:
        if self.at("{"):
            self.advance()
            out = []
            while not self.at("}"):
                if self.tok.kind == "EOF":
                    raise self.error("'}'")
                out.append(self.stmt())
            self.advance()
            return tuple(out)
        return (self.stmt(),)

    def stmt(self) -> Stmt:
        t = self.tok
        if self.at("if"):
            self.advance()
            self.expect("(")
            c = self.cond()
            self.expect(")")
            then = self.block()
            orelse: tuple[Stmt, ...] = ()
            if self.at("else"):
                self.advance()
                orelse = self.block()
            return If(c, then, orelse, t.pos)
        if self.at("while"):
            self.advance()
            self.expect("(")
            c = self.cond()
            self.expect(")")
            return While(c, self.block(), t.pos)
        if self.at("for"):
            self.advance()
            self.expect("(")
            init = self.simple_assign()
            self.expect(";")
            c = self.cond()
            self.expect(";")
            step = self.simple_assign()
            self.expect(")")
            return For(init, c, step, self.block(), t.pos)
        if self.at("assert"):
            self.advance()
            self.expect("(")
            c = self.cond()
            self.expect(")")
            self.expect(";")
            return Assert(c, t.pos)
        if t.kind != "ID":
            raise self.error("a statement")
        if self.peek().text == "[":
            name = self.advance().text
            self.expect("[")
            idx = self.expr()
            self.expect("]")
            self.expect(":=")
            val = self.expr()
            self.expect(";")
            return Store(name, idx, val, t.pos)
        s = self.assignment()
        self.expect(";")
        return s

    def simple_assign(self) -> Assign:
        t = self.ident()
        self.expect(":=")
        return Assign(t.text, self.expr(), t.pos)

    def assignment(self) -> Stmt:
        t = self.ident()
        self.expect(":=")
        if self.at("new"):
            self.advance()
            self.expect("Int")
            self.expect("[")
            n = self.expr()
            self.expect("]")
            return Alloc(t.text, n, t.pos)
        if self.at("true") or self.at("false"):
            v = self.advance()
            return BoolAssign(t.text, BoolConst(v.text == "true", v.pos), t.pos)
        if self.at("("):
            self.advance()
            c = self.cond()
            self.expect(")")
            return BoolAssign(t.text, c, t.pos)
        return Assign(t.text, self.expr(), t.pos)

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "INT" or (self.at("-") and self.peek().kind == "INT"):
            return Num(self.integer(), t.pos)
        if t.kind == "ID":
            self.advance()
            if self.at(".length"):
                self.advance()
                return Var(length_var(t.text), t.pos)
            return Var(t.text, t.pos)
        raise self.error("an expression")

    def expr(self) -> Expr:
        e = self.atom()
        while self.at("+") or self.at("-"):
            op = self.advance()
            e = BinOp(op.text, e, self.atom(), op.pos)
        return e

    def cond(self) -> Cond:
        t = self.tok
        if self.at("!"):
            self.advance()
            return Not(self.cond(), t.pos)
        if self.at("true") or self.at("false"):
            self.advance()
            return BoolConst(t.text == "true", t.pos)
        if t.kind == "ID" and self.peek().kind == "SYM" and self.peek().text in (")", ";"):
            self.advance()
            return BoolVar(t.text, t.pos)
        left = self.expr()
        op = self.tok
        if not (op.kind == "SYM" and op.text in RELATIONS):
            raise self.error("a comparison operator")
        self.advance()
        return Rel(op.text, left, self.expr(), op.pos)


def parse(text: str) -> Program:
    """Parse program text; boolean variables are recognised from how they are used."""
    return _retype(_Parser(text).program())


def parse_expr(text: str) -> Expr:
    p = _Parser(text)
    e = p.expr()
    if p.tok.kind != "EOF":
        raise p.error("end of input")
    return e


def parse_cond(text: str) -> Cond:
    p = _Parser(text)
    c = p.cond()
    if p.tok.kind != "EOF":
        raise p.error("end of input")
    return c


# boolean variables


def _walk(stmts):
    for s in stmts:
        yield s
        if isinstance(s, If):
            yield from _walk(s.then)
            yield from _walk(s.orelse)
        elif isinstance(s, While):
            yield from _walk(s.body)
        elif isinstance(s, For):
            yield s.init
            yield s.step
            yield from _walk(s.body)


def _conds(s: Stmt):
    if isinstance(s, (If, While, For, Assert)):
        yield s.cond
    elif isinstance(s, BoolAssign):
        yield s.cond


def _bool_uses(c: Cond):
    if isinstance(c, BoolVar):
        yield c
    elif isinstance(c, Not):
        yield from _bool_uses(c.cond)


def _num_uses(c: Cond):
    if isinstance(c, Rel):
        yield from _expr_vars(c.left)
        yield from _expr_vars(c.right)
    elif isinstance(c, Not):
        yield from _num_uses(c.cond)


def _expr_vars(e: Expr):
    if isinstance(e, Var):
        yield e
    elif isinstance(e, BinOp):
        yield from _expr_vars(e.left)
        yield from _expr_vars(e.right)


def boolean_variables(p: Program) -> set[str]:
    stmts = list(_walk(p.body))
    bools = {s.target for s in stmts if isinstance(s, BoolAssign)}
    for s in stmts:
        for c in _conds(s):
            bools |= {b.name for b in _bool_uses(c)}
    changed = True
    while changed:
        changed = False
        for s in stmts:
            if isinstance(s, Assign) and isinstance(s.expr, Var):
                pair = {s.target, s.expr.name}
                if pair & bools and not pair <= bools:
                    bools |= pair
                    changed = True
    return bools


def _retype(p: Program) -> Program:
    bools = boolean_variables(p)
    if not bools:
        return p
    declared = {d.name: d for d in p.decls}
    for b in sorted(bools & declared.keys()):
        d = declared[b]
        raise ParseError(f"input {b!r} is used as a boolean", *d.pos)
    for s in _walk(p.body):
        uses: list = []
        if isinstance(s, Assign):
            if s.target in bools and not isinstance(s.expr, Var):
                raise ParseError(f"boolean {s.target!r} assigned an integer", *s.pos)
            if not isinstance(s.expr, Var):
                uses = list(_expr_vars(s.expr))
        elif isinstance(s, Alloc):
            uses = list(_expr_vars(s.length))
            if s.target in bools:
                raise ParseError(f"boolean {s.target!r} used as an array", *s.pos)
        elif isinstance(s, Store):
            uses = list(_expr_vars(s.index)) + list(_expr_vars(s.value))
        for c in _conds(s):
            uses += list(_num_uses(c))
        for v in uses:
            if v.name in bools:
                raise ParseError(f"boolean {v.name!r} used in arithmetic", *v.pos)
    return replace(p, body=_retype_block(p.body, bools))


def _retype_block(stmts, bools) -> tuple[Stmt, ...]:
    out = []
    for s in stmts:
        if isinstance(s, Assign) and s.target in bools:
            s = BoolAssign(s.target, BoolVar(s.expr.name, s.expr.pos), s.pos)
        elif isinstance(s, If):
            s = replace(s, then=_retype_block(s.then, bools), orelse=_retype_block(s.orelse, bools))
        elif isinstance(s, While):
            s = replace(s, body=_retype_block(s.body, bools))
        elif isinstance(s, For):
            s = replace(s, body=_retype_block(s.body, bools))
        out.append(s)
    return tuple(out)


# rendering


def _render_stmt(s: Stmt, indent: int) -> list[str]:
    pad = "  " * indent
    if isinstance(s, Assign):
        return [f"{pad}{s.target} := {show_expr(s.expr)};"]
    if isinstance(s, BoolAssign):
        if isinstance(s.cond, BoolConst):
            return [f"{pad}{s.target} := {show_cond(s.cond)};"]
        return [f"{pad}{s.target} := ({show_cond(s.cond)});"]
    if isinstance(s, Alloc):
        return [f"{pad}{s.target} := new Int[{show_expr(s.length)}];"]
    if isinstance(s, Store):
        return [f"{pad}{s.array}[{show_expr(s.index)}] := {show_expr(s.value)};"]
    if isinstance(s, Assert):
        return [f"{pad}assert ({show_cond(s.cond)});"]
    if isinstance(s, If):
        lines = [f"{pad}if ({show_cond(s.cond)}) {{"] + _render_block(s.then, indent + 1)
        if s.orelse:
            lines += [f"{pad}}} else {{"] + _render_block(s.orelse, indent + 1)
        return lines + [f"{pad}}}"]
    if isinstance(s, While):
        return [f"{pad}while ({show_cond(s.cond)}) {{"] + _render_block(s.body, indent + 1) + [f"{pad}}}"]
    if isinstance(s, For):
        head = (
            f"{pad}for ({s.init.target} := {show_expr(s.init.expr)}; {show_cond(s.cond)}; "
            f"{s.step.target} := {show_expr(s.step.expr)}) {{"
        )
        return [head] + _render_block(s.body, indent + 1) + [f"{pad}}}"]
    raise TypeError(f"not a statement: {s!r}")


def _render_block(stmts, indent: int) -> list[str]:
    return [line for s in stmts for line in _render_stmt(s, indent)]


def render(p: Program) -> str:
    lines = [f"input {d.name} in [{d.lo},{d.hi}];" for d in p.decls]
    lines += _render_block(p.body, 0)
    return "\n".join(lines) + ("\n" if lines else "")
