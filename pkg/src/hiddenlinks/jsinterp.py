"""Bounded, side-effect-free interpreter for the pure-string subset of JavaScript.

Values are Python primitives (``TStr``, ``float``, ``bool``, ``None`` for null,
``UNDEF``), lists, dicts, :class:`JSFunction` closures, or symbolic host
references (``document``, ``location``, elements fetched by id).  Anything the
interpreter cannot know is ``UNKNOWN``.

Host interactions are never performed; they are recorded as :class:`Event`
objects (style writes, ``document.write``, location changes, ``eval``).
Branches on unknown conditions run under an overlay scope whose writes are
invalidated afterwards, so folded constants stay sound.
"""

from __future__ import annotations

import base64
import json
import math
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Optional
from urllib.parse import unquote

from . import jsparse as P

DEFAULT_BUDGET = 10_000


class _Sentinel:
    def __init__(self, name: str):
        self.name = name

    def __repr__(self) -> str:
        return self.name


UNKNOWN = _Sentinel("UNKNOWN")
UNDEF = _Sentinel("undefined")


class BudgetExhausted(Exception):
    pass


class _Return(Exception):
    def __init__(self, value: Any):
        self.value = value


class _Break(Exception):
    pass


class _Continue(Exception):
    pass


class _Throw(Exception):
    pass


class TStr(str):
    """A string that remembers how it was obfuscated."""

    flags: frozenset = frozenset()

    def __new__(cls, value: str, flags: frozenset = frozenset()):
        obj = super().__new__(cls, value)
        obj.flags = frozenset(flags)
        return obj


def flags_of(value: Any) -> frozenset:
    return getattr(value, "flags", frozenset())


@dataclass(frozen=True)
class Host:
    path: str
    flags: frozenset = frozenset()


@dataclass(frozen=True)
class DomRef:
    kind: str  # id | class | tag
    name: str
    flags: frozenset = frozenset()


@dataclass(frozen=True)
class DomList:
    kind: str
    name: str
    flags: frozenset = frozenset()


@dataclass(frozen=True)
class StyleRef:
    dom: DomRef
    flags: frozenset = frozenset()


@dataclass(eq=False)
class JSFunction:
    name: Optional[str]
    params: list
    body: list
    closure: "Scope"
    arrow_expr: Optional[P.Node] = None


@dataclass(frozen=True)
class Builtin:
    name: str
    fn: Callable
    this: Any = None


@dataclass
class Event:
    kind: str  # style | write | redirect | eval | status
    evidence: str
    flags: frozenset
    data: dict = field(default_factory=dict)


HOST_ROOTS = {"document", "window", "location", "navigator", "top", "self", "parent", "screen", "history", "opener", "frames"}
LOCATION_HOSTS = {"location", "document.location", "top.location", "parent.location", "opener.location"}


def _canon_path(path: str) -> str:
    for prefix in ("window.", "self."):
        while path.startswith(prefix):
            path = path[len(prefix):]
    return path


# ----------------------------------------------------------------------------
# conversions

def to_str(v: Any) -> Any:
    if v is UNKNOWN:
        return UNKNOWN
    if isinstance(v, str):
        return v
    if v is UNDEF:
        return "undefined"
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return num_to_str(v)
    if isinstance(v, list):
        parts = [to_str(x) if x not in (None, UNDEF) else "" for x in v]
        if any(p is UNKNOWN for p in parts):
            return UNKNOWN
        return ",".join(parts)
    return UNKNOWN


def num_to_str(v: float) -> str:
    if math.isnan(v):
        return "NaN"
    if math.isinf(v):
        return "Infinity" if v > 0 else "-Infinity"
    if v == int(v) and abs(v) < 1e21:
        return str(int(v))
    return repr(v)


def to_num(v: Any) -> Any:
    if v is UNKNOWN:
        return UNKNOWN
    if isinstance(v, bool):
        return 1.0 if v else 0.0
    if isinstance(v, float):
        return v
    if v is None:
        return 0.0
    if v is UNDEF:
        return math.nan
    if isinstance(v, str):
        s = v.strip()
        if not s:
            return 0.0
        try:
            if s[:2].lower() == "0x":
                return float(int(s, 16))
            if s in ("Infinity", "+Infinity"):
                return math.inf
            if s == "-Infinity":
                return -math.inf
            if re.fullmatch(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?", s):
                return float(s)
        except ValueError:
            pass
        return math.nan
    if isinstance(v, list):
        return to_num(to_str(v))
    return UNKNOWN


def truthy(v: Any) -> Any:
    if v is UNKNOWN:
        return UNKNOWN
    if v is None or v is UNDEF:
        return False
    if isinstance(v, bool):
        return v
    if isinstance(v, float):
        return not (v == 0 or math.isnan(v))
    if isinstance(v, str):
        return len(v) > 0
    return True


def to_int32(n: float) -> int:
    if math.isnan(n) or math.isinf(n):
        return 0
    i = int(n) & 0xFFFFFFFF
    return i - (1 << 32) if i >= (1 << 31) else i


def js_parse_int(s: Any, radix: Any = UNDEF) -> Any:
    s = to_str(s)
    if s is UNKNOWN:
        return UNKNOWN
    s = s.strip()
    sign = 1
    if s[:1] in "+-" and s:
        sign = -1 if s[0] == "-" else 1
        s = s[1:]
    r = 0 if radix is UNDEF else to_int32(to_num(radix)) if to_num(radix) is not UNKNOWN else None
    if r is None:
        return UNKNOWN
    if r == 0:
        r = 10
        if s[:2].lower() == "0x":
            r, s = 16, s[2:]
    elif r == 16 and s[:2].lower() == "0x":
        s = s[2:]
    if not 2 <= r <= 36:
        return math.nan
    digits = "0123456789abcdefghijklmnopqrstuvwxyz"[:r]
    j = 0
    while j < len(s) and s[j].lower() in digits:
        j += 1
    if j == 0:
        return math.nan
    return float(sign * int(s[:j], r))


def js_string_literal(s: str) -> str:
    return json.dumps(str(s), ensure_ascii=False)


# ----------------------------------------------------------------------------
# scopes

class Scope:
    def __init__(self, parent: Optional["Scope"] = None, overlay: bool = False):
        self.vars: dict[str, Any] = {}
        self.parent = parent
        self.overlay = overlay
        self.written: set[str] = set()

    def find(self, name: str) -> Optional["Scope"]:
        s: Optional[Scope] = self
        while s is not None:
            if name in s.vars:
                return s
            s = s.parent
        return None

    def lookup(self, name: str) -> Any:
        s = self.find(name)
        return s.vars[name] if s is not None else UNDEF

    def has(self, name: str) -> bool:
        return self.find(name) is not None

    def declare(self, name: str, value: Any) -> None:
        self.vars[name] = value
        if self.overlay:
            self.written.add(name)

    def assign(self, name: str, value: Any) -> None:
        s: Optional[Scope] = self
        while s is not None:
            if s.overlay:
                s.vars[name] = value
                s.written.add(name)
                return
            if name in s.vars:
                s.vars[name] = value
                return
            s = s.parent
        root = self
        while root.parent is not None:
            root = root.parent
        root.vars[name] = value


# ----------------------------------------------------------------------------
# interpreter

class Interpreter:
    def __init__(self, budget: int = DEFAULT_BUDGET):
        self.budget = budget
        self.steps = 0
        self.events: list[Event] = []
        self.notes: list[str] = []
        self.deferred: list[JSFunction] = []
        # id(node) -> (node, value); holding the node stops its id being reused
        self.memo: dict[int, tuple[P.Node, Any]] = {}
        self.src = ""
        self.context_flags: frozenset = frozenset()
        self.folded: dict[str, str] = {}
        self._unstable: set[str] = set()
        self.decoded: list[str] = []
        self.global_scope = Scope()
        self._install_globals()

    # -- setup --------------------------------------------------------------
    def _install_globals(self) -> None:
        g = self.global_scope.vars
        g["undefined"] = UNDEF
        g["NaN"] = math.nan
        g["Infinity"] = math.inf
        g["parseInt"] = Builtin("parseInt", js_parse_int)
        g["parseFloat"] = Builtin("parseFloat", self._parse_float)
        g["isNaN"] = Builtin("isNaN", lambda v=UNDEF: UNKNOWN if to_num(v) is UNKNOWN else math.isnan(to_num(v)))
        g["unescape"] = Builtin("unescape", self._unescape)
        g["decodeURIComponent"] = Builtin("decodeURIComponent", self._decode_uri)
        g["decodeURI"] = Builtin("decodeURI", self._decode_uri)
        g["atob"] = Builtin("atob", self._atob)
        g["escape"] = Builtin("escape", lambda *a: UNKNOWN)
        g["String"] = {"fromCharCode": Builtin("String.fromCharCode", self._from_char_code), "__call__": Builtin("String", self._string_ctor)}
        g["Number"] = Builtin("Number", lambda v=0.0: to_num(v))
        g["Array"] = Builtin("Array", self._array_ctor)
        g["Math"] = {
            "floor": Builtin("Math.floor", lambda v=UNDEF: self._math(math.floor, v)),
            "ceil": Builtin("Math.ceil", lambda v=UNDEF: self._math(math.ceil, v)),
            "round": Builtin("Math.round", lambda v=UNDEF: self._math(lambda x: math.floor(x + 0.5), v)),
            "abs": Builtin("Math.abs", lambda v=UNDEF: self._math(abs, v)),
            "random": Builtin("Math.random", lambda *a: UNKNOWN),
            "PI": math.pi,
        }
        g["eval"] = Builtin("eval", None)
        g["setTimeout"] = Builtin("setTimeout", None)
        g["setInterval"] = Builtin("setInterval", None)

    # -- public ---------------------------------------------------------------
    def run(self, source: str, extra_flags: frozenset = frozenset()) -> P.Program:
        program = P.parse_program(source)
        for err in program.errors:
            self.notes.append(f"parse-error: {err}")
        saved = (self.src, self.context_flags)
        self.src = source
        self.context_flags = self.context_flags | extra_flags
        try:
            self.exec_body(program.body, self.global_scope)
        except BudgetExhausted:
            raise
        except (_Return, _Break, _Continue, _Throw):
            pass
        finally:
            self.src, self.context_flags = saved
        return program

    def run_deferred(self) -> None:
        seen = 0
        while seen < len(self.deferred):
            fn = self.deferred[seen]
            seen += 1
            self.call_function(fn, [], UNDEF)

    # -- budget ---------------------------------------------------------------
    def tick(self) -> None:
        self.steps += 1
        if self.steps > self.budget:
            raise BudgetExhausted()

    # -- statements -----------------------------------------------------------
    def hoist(self, body: list, scope: Scope) -> None:
        for stmt in body:
            if isinstance(stmt, P.FuncDecl):
                scope.declare(stmt.name, JSFunction(stmt.name, stmt.params, stmt.body, scope))
            elif isinstance(stmt, P.VarDecl) and stmt.kind == "var":
                for name, _ in stmt.decls:
                    if name not in scope.vars:
                        scope.declare(name, UNDEF)

    def exec_body(self, body: list, scope: Scope) -> None:
        self.hoist(body, scope)
        for stmt in body:
            self.exec(stmt, scope)

    def exec(self, node: P.Node, scope: Scope) -> None:
        self.tick()
        if isinstance(node, P.ExprStmt):
            self.eval(node.expr, scope)
        elif isinstance(node, P.VarDecl):
            for name, init in node.decls:
                if init is not None:
                    value = self.eval(init, scope)
                    self.record_fold(init, value)
                    scope.declare(name, value) if node.kind != "var" or name in scope.vars else scope.assign(name, value)
                elif node.kind != "var":
                    scope.declare(name, UNDEF)
        elif isinstance(node, P.FuncDecl):
            pass  # hoisted
        elif isinstance(node, P.Block):
            self.hoist([s for s in node.body if isinstance(s, P.FuncDecl)], scope)
            for stmt in node.body:
                self.exec(stmt, scope)
        elif isinstance(node, P.If):
            cond = truthy(self.eval(node.test, scope))
            if cond is UNKNOWN:
                self.uncertain(lambda s: self.exec(node.cons, s), scope)
                if node.alt is not None:
                    self.uncertain(lambda s: self.exec(node.alt, s), scope)
            elif cond:
                self.exec(node.cons, scope)
            elif node.alt is not None:
                self.exec(node.alt, scope)
        elif isinstance(node, P.For):
            self.exec_for(node, scope)
        elif isinstance(node, P.While):
            self.exec_while(node, scope)
        elif isinstance(node, P.ForIn):
            self.exec_for_in(node, scope)
        elif isinstance(node, P.Return):
            raise _Return(self.eval(node.arg, scope) if node.arg is not None else UNDEF)
        elif isinstance(node, P.Jump):
            raise _Break() if node.kind == "break" else _Continue()
        elif isinstance(node, P.Throw):
            self.eval(node.arg, scope)
            raise _Throw()
        elif isinstance(node, P.Try):
            self.exec_try(node, scope)
        elif isinstance(node, P.Switch):
            self.exec_switch(node, scope)

    def uncertain(self, action: Callable[[Scope], None], scope: Scope) -> None:
        """Run ``action`` in an overlay; names it writes become UNKNOWN afterwards."""
        overlay = Scope(scope, overlay=True)
        try:
            action(overlay)
        except (_Return, _Break, _Continue, _Throw):
            pass
        for name in overlay.written:
            scope.assign(name, UNKNOWN)

    def exec_for(self, node: P.For, scope: Scope) -> None:
        if node.init is not None:
            self.exec(node.init, scope)
        while True:
            cond = True if node.test is None else truthy(self.eval(node.test, scope))
            if cond is UNKNOWN:
                def once(s: Scope) -> None:
                    self.exec(node.body, s)
                    if node.update is not None:
                        self.eval(node.update, s)
                self.uncertain(once, scope)
                return
            if not cond:
                return
            try:
                self.exec(node.body, scope)
            except _Break:
                return
            except _Continue:
                pass
            if node.update is not None:
                self.eval(node.update, scope)

    def exec_while(self, node: P.While, scope: Scope) -> None:
        first = node.do
        while True:
            if not first:
                cond = truthy(self.eval(node.test, scope))
                if cond is UNKNOWN:
                    self.uncertain(lambda s: self.exec(node.body, s), scope)
                    return
                if not cond:
                    return
            first = False
            try:
                self.exec(node.body, scope)
            except _Break:
                return
            except _Continue:
                pass

    def exec_for_in(self, node: P.ForIn, scope: Scope) -> None:
        it = self.eval(node.iterable, scope)
        if isinstance(it, list):
            keys = [TStr(str(i)) for i in range(len(it))]
        elif isinstance(it, dict):
            keys = [TStr(k) for k in it if not k.startswith("__")]
        else:
            def once(s: Scope) -> None:
                s.assign(node.name, UNKNOWN)
                self.exec(node.body, s)
            self.uncertain(once, scope)
            return
        for key in keys:
            scope.assign(node.name, key)
            try:
                self.exec(node.body, scope)
            except _Break:
                return
            except _Continue:
                pass

    def exec_try(self, node: P.Try, scope: Scope) -> None:
        try:
            self.exec(node.block, scope)
        except _Throw:
            if node.handler is not None:
                if node.param:
                    scope.declare(node.param, UNKNOWN)
                self.exec(node.handler, scope)
        finally:
            if node.finalizer is not None:
                self.exec(node.finalizer, scope)

    def exec_switch(self, node: P.Switch, scope: Scope) -> None:
        disc = self.eval(node.disc, scope)
        matched = False
        try:
            for test, body in node.cases:
                if not matched:
                    if test is None:
                        continue
                    tv = self.eval(test, scope)
                    eq = self.strict_equal(disc, tv)
                    if eq is UNKNOWN:
                        self.uncertain(lambda s, b=body: [self.exec(x, s) for x in b], scope)
                        continue
                    matched = eq
                if matched:
                    for stmt in body:
                        self.exec(stmt, scope)
            if not matched:
                for test, body in node.cases:
                    if test is None or matched:
                        matched = True
                        for stmt in body:
                            self.exec(stmt, scope)
        except _Break:
            pass

    # -- expressions ----------------------------------------------------------
    def eval(self, node: P.Node, scope: Scope) -> Any:
        self.tick()
        value = self._eval(node, scope)
        self.memo[id(node)] = (node, value)
        return value

    def memo_get(self, node: P.Node, default: Any = None) -> Any:
        entry = self.memo.get(id(node))
        return entry[1] if entry is not None and entry[0] is node else default

    def record_fold(self, node: P.Node, value: Any) -> None:
        """Remember a folded constant; an expression seen with two values is not constant."""
        if isinstance(node, P.Str) or node.end <= node.start:
            return
        key = self.src[node.start:node.end]
        if key in self._unstable:
            return
        if not isinstance(value, str) or self.folded.get(key, value) != value:
            self.folded.pop(key, None)
            self._unstable.add(key)
            return
        self.folded[key] = str(value)

    def _eval(self, node: P.Node, scope: Scope) -> Any:
        if isinstance(node, P.Str):
            return TStr(node.value, {"hex_escape"} if node.hexed else set())
        if isinstance(node, P.Num):
            return node.value
        if isinstance(node, P.Literal):
            if node.kind == "const":
                return node.value
            return UNKNOWN
        if isinstance(node, P.Ident):
            s = scope.find(node.name)
            if s is not None:
                return s.vars[node.name]
            if node.name in HOST_ROOTS:
                return Host(_canon_path(node.name))
            return UNKNOWN
        if isinstance(node, P.ArrayLit):
            return [UNDEF if e is None else self.eval(e, scope) for e in node.elements]
        if isinstance(node, P.ObjectLit):
            return {str(k): self.eval(v, scope) for k, v in node.props}
        if isinstance(node, P.FuncExpr):
            return JSFunction(node.name, node.params, node.body, scope, node.arrow_expr)
        if isinstance(node, P.Member):
            obj = self.eval(node.obj, scope)
            prop = self.eval(node.prop, scope) if node.computed else TStr(node.prop.value)
            value = self.get_member(obj, prop)
            if node.computed:
                self.record_fold(node, value)
            return value
        if isinstance(node, P.Call):
            return self.eval_call(node, scope)
        if isinstance(node, P.Assign):
            return self.eval_assign(node, scope)
        if isinstance(node, P.Binary):
            return self.eval_binary(node, scope)
        if isinstance(node, P.Unary):
            return self.eval_unary(node, scope)
        if isinstance(node, P.Update):
            old = to_num(self.eval(node.arg, scope))
            new = UNKNOWN if old is UNKNOWN else old + (1 if node.op == "++" else -1)
            self.store(node.arg, new, scope)
            return new if node.prefix else old
        if isinstance(node, P.Cond):
            t = truthy(self.eval(node.test, scope))
            if t is UNKNOWN:
                self.uncertain(lambda s: self.eval(node.cons, s), scope)
                self.uncertain(lambda s: self.eval(node.alt, s), scope)
                return UNKNOWN
            return self.eval(node.cons if t else node.alt, scope)
        if isinstance(node, P.Seq):
            value: Any = UNDEF
            for e in node.exprs:
                value = self.eval(e, scope)
            return value
        return UNKNOWN

    def eval_binary(self, node: P.Binary, scope: Scope) -> Any:
        op = node.op
        left = self.eval(node.left, scope)
        if op in ("&&", "||", "??"):
            if op == "??":
                if left is UNKNOWN:
                    self.eval(node.right, scope)
                    return UNKNOWN
                return self.eval(node.right, scope) if left in (None, UNDEF) else left
            t = truthy(left)
            if t is UNKNOWN:
                self.uncertain(lambda s: self.eval(node.right, s), scope)
                return UNKNOWN
            if (op == "&&") == bool(t):
                return self.eval(node.right, scope)
            return left
        right = self.eval(node.right, scope)
        value = self.binary_op(op, left, right)
        if op == "+":
            self.record_fold(node, value)
        return value

    def binary_op(self, op: str, a: Any, b: Any) -> Any:
        if a is UNKNOWN or b is UNKNOWN:
            return UNKNOWN
        if op == "+":
            if isinstance(a, (list, dict)) or isinstance(b, (list, dict)):
                a2, b2 = to_str(a), to_str(b)
                if a2 is UNKNOWN or b2 is UNKNOWN:
                    return UNKNOWN
                a, b = a2, b2
            if isinstance(a, str) or isinstance(b, str):
                sa, sb = to_str(a), to_str(b)
                if sa is UNKNOWN or sb is UNKNOWN:
                    return UNKNOWN
                return TStr(sa + sb, flags_of(a) | flags_of(b) | {"concat"})
            na, nb = to_num(a), to_num(b)
            return UNKNOWN if UNKNOWN in (na, nb) else na + nb
        if op in ("===", "!=="):
            eq = self.strict_equal(a, b)
            return eq if eq is UNKNOWN or op == "===" else not eq
        if op in ("==", "!="):
            eq = self.loose_equal(a, b)
            return eq if eq is UNKNOWN or op == "==" else not eq
        if op in ("<", ">", "<=", ">="):
            if isinstance(a, str) and isinstance(b, str):
                x, y = str(a), str(b)
            else:
                x, y = to_num(a), to_num(b)
                if UNKNOWN in (x, y):
                    return UNKNOWN
                if math.isnan(x) or math.isnan(y):
                    return False
            return {"<": x < y, ">": x > y, "<=": x <= y, ">=": x >= y}[op]
        if op in ("in", "instanceof"):
            return UNKNOWN
        x, y = to_num(a), to_num(b)
        if UNKNOWN in (x, y):
            return UNKNOWN
        if op == "-":
            return x - y
        if op == "*":
            return x * y
        if op == "/":
            if y == 0:
                return math.nan if x == 0 or math.isnan(x) else math.copysign(math.inf, x) * math.copysign(1, y)
            return x / y
        if op == "%":
            if y == 0 or math.isinf(x) or math.isnan(x) or math.isnan(y):
                return math.nan
            return math.fmod(x, y)
        if op == "**":
            try:
                return float(x ** y)
            except (OverflowError, ZeroDivisionError):
                return math.inf
        ix, iy = to_int32(x), to_int32(y)
        if op == "&":
            return float(to_int32(ix & iy))
        if op == "|":
            return float(to_int32(ix | iy))
        if op == "^":
            return float(to_int32(ix ^ iy))
        if op == "<<":
            return float(to_int32(ix << (iy & 31)))
        if op == ">>":
            return float(ix >> (iy & 31))
        if op == ">>>":
            return float((ix & 0xFFFFFFFF) >> (iy & 31))
        return UNKNOWN

    @staticmethod
    def strict_equal(a: Any, b: Any) -> Any:
        if a is UNKNOWN or b is UNKNOWN:
            return UNKNOWN
        if isinstance(a, str) and isinstance(b, str):
            return str(a) == str(b)
        if isinstance(a, bool) or isinstance(b, bool):
            return type(a) is type(b) and a == b
        if isinstance(a, float) and isinstance(b, float):
            return a == b
        if isinstance(a, (Host, DomRef, DomList, StyleRef)) or isinstance(b, (Host, DomRef, DomList, StyleRef)):
            return UNKNOWN
        return a is b

    def loose_equal(self, a: Any, b: Any) -> Any:
        if a is UNKNOWN or b is UNKNOWN:
            return UNKNOWN
        if a in (None, UNDEF) and not isinstance(a, bool):
            return b in (None, UNDEF) and not isinstance(b, bool)
        if b in (None, UNDEF) and not isinstance(b, bool):
            return False
        if isinstance(a, str) and isinstance(b, str):
            return str(a) == str(b)
        prim = (str, float, bool)
        if isinstance(a, prim) and isinstance(b, prim):
            na, nb = to_num(a), to_num(b)
            return na == nb
        return self.strict_equal(a, b)

    def eval_unary(self, node: P.Unary, scope: Scope) -> Any:
        if node.op == "typeof" and isinstance(node.arg, P.Ident) and not scope.has(node.arg.name):
            return TStr("object") if node.arg.name in HOST_ROOTS else UNKNOWN
        v = self.eval(node.arg, scope)
        if node.op == "void":
            return UNDEF
        if node.op == "delete":
            return True
        if v is UNKNOWN:
            return UNKNOWN
        if node.op == "!":
            return not truthy(v)
        if node.op == "typeof":
            if isinstance(v, str):
                return TStr("string")
            if isinstance(v, bool):
                return TStr("boolean")
            if isinstance(v, float):
                return TStr("number")
            if v is UNDEF:
                return TStr("undefined")
            if isinstance(v, (JSFunction, Builtin)):
                return TStr("function")
            return TStr("object")
        n = to_num(v)
        if n is UNKNOWN:
            return UNKNOWN
        if node.op == "-":
            return -n
        if node.op == "+":
            return n
        if node.op == "~":
            return float(~to_int32(n))
        return UNKNOWN

    # -- members --------------------------------------------------------------
    def get_member(self, obj: Any, prop: Any) -> Any:
        if obj is UNKNOWN or prop is UNKNOWN:
            return UNKNOWN
        key = to_str(prop)
        if key is UNKNOWN:
            return UNKNOWN
        pflags = flags_of(prop)
        if isinstance(obj, str):
            return self.string_member(obj, key, pflags)
        if isinstance(obj, list):
            if key == "length":
                return float(len(obj))
            if re.fullmatch(r"\d+", key):
                i = int(key)
                if i >= len(obj):
                    return UNDEF
                v = obj[i]
                if isinstance(v, str):
                    return TStr(v, flags_of(v) | pflags | {"array_indexing"})
                return v
            return self.array_method(obj, key)
        if isinstance(obj, dict):
            if key in obj:
                v = obj[key]
                if isinstance(v, str):
                    return TStr(v, flags_of(v) | pflags | {"array_indexing"})
                return v
            return UNDEF
        if isinstance(obj, float) and key == "toString":
            return Builtin("Number.toString", lambda radix=10.0: self._num_to_string(obj, radix))
        if isinstance(obj, Host):
            return self.host_member(obj, key, pflags)
        if isinstance(obj, DomList):
            if re.fullmatch(r"\d+", key):
                return DomRef(obj.kind, obj.name, obj.flags | pflags)
            return UNKNOWN
        if isinstance(obj, DomRef):
            if key == "style":
                return StyleRef(obj, obj.flags | pflags)
            if key == "setAttribute":
                return Builtin("setAttribute", None, this=DomRef(obj.kind, obj.name, obj.flags | pflags))
            return UNKNOWN
        return UNKNOWN

    def host_member(self, obj: Host, key: str, pflags: frozenset) -> Any:
        path = _canon_path(f"{obj.path}.{key}") if obj.path != "window" else _canon_path(key)
        flags = obj.flags | pflags
        if obj.path == "document.all":
            return DomRef("id", key, flags)
        if path in ("eval",):
            return self.global_scope.vars["eval"]
        if path in ("setTimeout", "setInterval"):
            return self.global_scope.vars[path]
        if path.split(".")[0] in HOST_ROOTS or path in ("all",):
            return Host(path, flags)
        return UNKNOWN

    def string_member(self, s: str, key: str, pflags: frozenset) -> Any:
        base = flags_of(s)
        if key == "length":
            return float(len(s))
        if re.fullmatch(r"\d+", key):
            i = int(key)
            return TStr(s[i], base) if i < len(s) else UNDEF

        def wrap(fn: Callable) -> Builtin:
            return Builtin(f"String.{key}", fn, this=s)

        def sub(a: Any = UNDEF, b: Any = UNDEF) -> Any:
            n = len(s)
            x = to_num(a) if a is not UNDEF else 0.0
            y = to_num(b) if b is not UNDEF else float(n)
            if UNKNOWN in (x, y):
                return UNKNOWN
            x = 0 if math.isnan(x) else int(max(0, min(n, x)))
            y = 0 if math.isnan(y) else int(max(0, min(n, y)))
            lo, hi = min(x, y), max(x, y)
            return TStr(s[lo:hi], base)

        def slice_(a: Any = UNDEF, b: Any = UNDEF) -> Any:
            n = len(s)
            x = to_num(a) if a is not UNDEF else 0.0
            y = to_num(b) if b is not UNDEF else float(n)
            if UNKNOWN in (x, y):
                return UNKNOWN
            x = 0 if math.isnan(x) else int(x)
            y = 0 if math.isnan(y) else int(y)
            x = max(0, n + x) if x < 0 else min(x, n)
            y = max(0, n + y) if y < 0 else min(y, n)
            return TStr(s[x:y] if x < y else "", base)

        def substr(a: Any = UNDEF, length: Any = UNDEF) -> Any:
            n = len(s)
            x = to_num(a) if a is not UNDEF else 0.0
            ln = to_num(length) if length is not UNDEF else float(n)
            if UNKNOWN in (x, ln):
                return UNKNOWN
            x = 0 if math.isnan(x) else int(x)
            x = max(0, n + x) if x < 0 else min(x, n)
            ln = 0 if math.isnan(ln) else int(max(0, min(ln, n - x)))
            return TStr(s[x:x + ln], base)

        def char_at(i: Any = 0.0) -> Any:
            k = to_num(i)
            if k is UNKNOWN:
                return UNKNOWN
            k = 0 if math.isnan(k) else int(k)
            return TStr(s[k] if 0 <= k < len(s) else "", base)

        def char_code_at(i: Any = 0.0) -> Any:
            k = to_num(i)
            if k is UNKNOWN:
                return UNKNOWN
            k = 0 if math.isnan(k) else int(k)
            return float(ord(s[k])) if 0 <= k < len(s) else math.nan

        def index_of(needle: Any = UNDEF, start: Any = 0.0) -> Any:
            t, k = to_str(needle), to_num(start)
            if UNKNOWN in (t, k):
                return UNKNOWN
            return float(s.find(t, max(0, int(k) if not math.isnan(k) else 0)))

        def split(sep: Any = UNDEF, limit: Any = UNDEF) -> Any:
            if sep is UNDEF:
                return [TStr(s, base)]
            if not isinstance(sep, str):
                return UNKNOWN
            parts = list(s) if sep == "" else s.split(str(sep))
            return [TStr(p, base) for p in parts]

        def replace(pat: Any = UNDEF, rep: Any = UNDEF) -> Any:
            if not isinstance(pat, str) or not isinstance(rep, str):
                return UNKNOWN
            return TStr(s.replace(str(pat), str(rep), 1), base | flags_of(rep))

        def concat(*args: Any) -> Any:
            parts = [to_str(a) for a in args]
            if UNKNOWN in parts:
                return UNKNOWN
            return TStr(s + "".join(parts), base | {"concat"})

        methods = {
            "substring": sub, "slice": slice_, "substr": substr, "charAt": char_at,
            "charCodeAt": char_code_at, "indexOf": index_of, "split": split, "replace": replace,
            "concat": concat,
            "lastIndexOf": lambda needle=UNDEF: UNKNOWN if to_str(needle) is UNKNOWN else float(s.rfind(to_str(needle))),
            "toLowerCase": lambda: TStr(s.lower(), base),
            "toUpperCase": lambda: TStr(s.upper(), base),
            "trim": lambda: TStr(s.strip(), base),
            "toString": lambda: s,
        }
        if key in methods:
            return wrap(methods[key])
        return UNDEF

    def array_method(self, arr: list, key: str) -> Any:
        def join(sep: Any = UNDEF) -> Any:
            sep_s = "," if sep is UNDEF else to_str(sep)
            parts = [to_str(x) if x not in (None, UNDEF) else "" for x in arr]
            if sep_s is UNKNOWN or UNKNOWN in parts:
                return UNKNOWN
            flags = frozenset().union(*(flags_of(x) for x in arr)) if arr else frozenset()
            return TStr(sep_s.join(parts), flags | {"array_indexing"})

        def reverse() -> Any:
            arr.reverse()
            return arr

        def push(*items: Any) -> Any:
            arr.extend(items)
            return float(len(arr))

        def pop() -> Any:
            return arr.pop() if arr else UNDEF

        def shift() -> Any:
            return arr.pop(0) if arr else UNDEF

        def concat(*items: Any) -> Any:
            out = list(arr)
            for it in items:
                out.extend(it if isinstance(it, list) else [it])
            return out

        def slice_(a: Any = 0.0, b: Any = UNDEF) -> Any:
            n = len(arr)
            x, y = to_num(a), (float(n) if b is UNDEF else to_num(b))
            if UNKNOWN in (x, y):
                return UNKNOWN
            x, y = int(x), int(y)
            x = max(0, n + x) if x < 0 else min(x, n)
            y = max(0, n + y) if y < 0 else min(y, n)
            return arr[x:y]

        methods = {"join": join, "reverse": reverse, "push": push, "pop": pop, "shift": shift,
                   "concat": concat, "slice": slice_}
        if key in methods:
            return Builtin(f"Array.{key}", methods[key], this=arr)
        return UNDEF

    # -- assignment -----------------------------------------------------------
    def eval_assign(self, node: P.Assign, scope: Scope) -> Any:
        if node.op == "=":
            value = self.eval(node.value, scope)
        else:
            old = self.eval(node.target, scope)
            rhs = self.eval(node.value, scope)
            value = self.binary_op(node.op[:-1], old, rhs)
            self.memo[id(node.value)] = (node.value, value if node.op == "+=" else rhs)
        if node.op == "=":
            self.record_fold(node.value, value)
        self.store(node.target, value, scope, node)
        return value

    def store(self, target: P.Node, value: Any, scope: Scope, assign: Optional[P.Assign] = None) -> None:
        if isinstance(target, P.Ident):
            s = scope.find(target.name)
            if s is None and target.name in ("location",):
                self.on_host_assign(Host("location"), "", value, assign)
                return
            if s is None and target.name in ("status", "defaultStatus"):
                self.on_host_assign(Host("window"), "status", value, assign)
                return
            scope.assign(target.name, value)
            return
        if not isinstance(target, P.Member):
            return
        obj = self.eval(target.obj, scope)
        prop = self.eval(target.prop, scope) if target.computed else TStr(target.prop.value)
        key = to_str(prop)
        if obj is UNKNOWN or key is UNKNOWN:
            return
        if isinstance(obj, list) and re.fullmatch(r"\d+", key):
            i = int(key)
            if i < 100_000:
                while len(obj) <= i:
                    obj.append(UNDEF)
                obj[i] = value
        elif isinstance(obj, dict):
            obj[key] = value
        elif isinstance(obj, StyleRef):
            self.on_style(obj.dom, key, value, obj.flags | flags_of(prop), assign)
        elif isinstance(obj, Host):
            self.on_host_assign(obj, key, value, assign, flags_of(prop))

    # -- host effects ---------------------------------------------------------
    def on_style(self, dom: DomRef, prop: str, value: Any, flags: frozenset, assign: Optional[P.Assign]) -> None:
        evidence = self.render(assign) if assign is not None else f"{dom.kind}:{dom.name}.style.{prop}"
        self.events.append(
            Event("style", evidence, flags | flags_of(value) | self.context_flags,
                  {"dom": dom, "prop": prop, "value": value if isinstance(value, str) else UNKNOWN})
        )

    def on_host_assign(self, obj: Host, key: str, value: Any, assign: Optional[P.Assign], pflags: frozenset = frozenset()) -> None:
        path = _canon_path(f"{obj.path}.{key}" if key else obj.path)
        if obj.path == "window" and key:
            path = _canon_path(key)
        evidence = self.render(assign) if assign is not None else path
        flags = obj.flags | pflags | flags_of(value) | self.context_flags
        if path in LOCATION_HOSTS or (path.endswith(".href") and path[:-5] in LOCATION_HOSTS) or path == "location.href":
            self.events.append(Event("redirect", evidence, flags, {"target": value if isinstance(value, str) else None, "via": path}))
        elif path in ("status", "defaultStatus"):
            self.events.append(Event("status", evidence, flags, {"value": value}))
        elif path in ("onload", "document.onreadystatechange", "document.onload") and isinstance(value, JSFunction):
            self.deferred.append(value)

    # -- calls ----------------------------------------------------------------
    def eval_call(self, node: P.Call, scope: Scope) -> Any:
        callee = self.eval(node.callee, scope)
        args = [self.eval(a, scope) for a in node.args]
        if node.new:
            if isinstance(callee, Builtin) and callee.name == "Array":
                return self._array_ctor(*args)
            if isinstance(callee, dict) and "__call__" in callee:
                return callee["__call__"].fn(*args)
            return UNKNOWN
        if isinstance(callee, dict) and "__call__" in callee:
            callee = callee["__call__"]
        if isinstance(callee, JSFunction):
            value = self.call_function(callee, args, UNDEF)
            self.record_fold(node, value)
            return value
        if isinstance(callee, Builtin):
            if callee.name == "eval":
                return self.do_eval(node, args, scope)
            if callee.name in ("setTimeout", "setInterval"):
                if args and isinstance(args[0], str):
                    return self.do_eval(node, args[:1], scope)
                if args and isinstance(args[0], JSFunction):
                    self.deferred.append(args[0])
                return UNKNOWN
            if callee.name == "setAttribute":
                if len(args) >= 2 and isinstance(args[0], str) and args[0].lower() == "style" and isinstance(args[1], str):
                    self.on_style(callee.this, "cssText", args[1], flags_of(args[1]), None)
                    self.events[-1].evidence = self.render(node)
                return UNDEF
            try:
                value = callee.fn(*args)
            except (TypeError, ValueError, IndexError, OverflowError):
                value = UNKNOWN
            self.record_fold(node, value)
            return value
        if isinstance(callee, Host):
            return self.host_call(callee, args, node)
        return UNKNOWN

    def host_call(self, host: Host, args: list, node: P.Call) -> Any:
        path = host.path
        first = args[0] if args else UNDEF
        flags = host.flags | flags_of(first)
        if path in ("document.getElementById", "document.all"):
            return DomRef("id", str(first), flags) if isinstance(first, str) else UNKNOWN
        if path == "document.getElementsByClassName":
            return DomList("class", str(first).strip(), flags) if isinstance(first, str) else UNKNOWN
        if path == "document.getElementsByName":
            return DomList("name", str(first), flags) if isinstance(first, str) else UNKNOWN
        if path == "document.querySelector" and isinstance(first, str):
            m = re.fullmatch(r"\s*([#.])([\w-]+)\s*", str(first))
            if m:
                return DomRef("id" if m.group(1) == "#" else "class", m.group(2), flags)
            return UNKNOWN
        if path in ("document.write", "document.writeln"):
            parts = [to_str(a) for a in args]
            text = UNKNOWN if UNKNOWN in parts else "".join(parts)
            wflags = frozenset().union(*(flags_of(a) for a in args)) if args else frozenset()
            self.events.append(
                Event("write", self.render(node), host.flags | wflags | self.context_flags | {"doc_write"},
                      {"text": text})
            )
            return UNDEF
        if path in {f"{h}.{m}" for h in LOCATION_HOSTS for m in ("replace", "assign")}:
            self.events.append(
                Event("redirect", self.render(node), flags | self.context_flags,
                      {"target": first if isinstance(first, str) else None, "via": path})
            )
            return UNDEF
        return UNKNOWN

    def call_function(self, fn: JSFunction, args: list, this: Any) -> Any:
        scope = Scope(fn.closure)
        for i, name in enumerate(fn.params):
            scope.declare(name, args[i] if i < len(args) else UNDEF)
        if fn.arrow_expr is not None:
            return self.eval(fn.arrow_expr, scope)
        try:
            self.exec_body(fn.body, scope)
        except _Return as ret:
            return ret.value
        except (_Break, _Continue):
            pass
        except _Throw:
            return UNKNOWN
        return UNDEF

    def do_eval(self, node: P.Call, args: list, scope: Scope) -> Any:
        code = args[0] if args else UNDEF
        if not isinstance(code, str):
            # non-string primitives evaluate to themselves; anything else is opaque
            if isinstance(code, (bool, int, float)) or code is UNDEF:
                return code
            self.notes.append("eval-nonconstant")
            return UNKNOWN
        decoder = bool(node.args) and isinstance(node.args[0], P.Call)
        extra = frozenset({"eval_decoder"}) if decoder else frozenset()
        self.decoded.append(str(code))
        self.events.append(Event("eval", self.render(node), flags_of(code) | self.context_flags | extra,
                                 {"source": str(code), "decoder": decoder}))
        saved_memo, saved_src, saved_ctx = self.memo, self.src, self.context_flags
        self.memo = {}
        try:
            program = P.parse_program(str(code))
            for err in program.errors:
                self.notes.append(f"parse-error: {err}")
            self.src = str(code)
            self.context_flags = saved_ctx | extra
            self.exec_body(program.body, scope)
        except (_Return, _Break, _Continue, _Throw):
            pass
        finally:
            self.memo, self.src, self.context_flags = saved_memo, saved_src, saved_ctx
        return UNKNOWN

    # -- builtins -------------------------------------------------------------
    def _from_char_code(self, *codes: Any) -> Any:
        out = []
        for c in codes:
            n = to_num(c)
            if n is UNKNOWN:
                return UNKNOWN
            out.append(chr(to_int32(n) & 0xFFFF))
        return TStr("".join(out))

    def _string_ctor(self, v: Any = "") -> Any:
        s = to_str(v)
        return s if s is UNKNOWN else TStr(s, flags_of(v))

    def _array_ctor(self, *args: Any) -> Any:
        if len(args) == 1 and isinstance(args[0], float):
            n = int(args[0])
            return [UNDEF] * min(max(n, 0), 10_000)
        return list(args)

    @staticmethod
    def _parse_float(v: Any = UNDEF) -> Any:
        s = to_str(v)
        if s is UNKNOWN:
            return UNKNOWN
        m = re.match(r"\s*([+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?)", s)
        return float(m.group(1)) if m else math.nan

    @staticmethod
    def _unescape(v: Any = UNDEF) -> Any:
        s = to_str(v)
        if s is UNKNOWN:
            return UNKNOWN
        s = re.sub(r"%u([0-9a-fA-F]{4})", lambda m: chr(int(m.group(1), 16)), s)
        s = re.sub(r"%([0-9a-fA-F]{2})", lambda m: chr(int(m.group(1), 16)), s)
        return TStr(s, flags_of(v))

    @staticmethod
    def _decode_uri(v: Any = UNDEF) -> Any:
        s = to_str(v)
        return UNKNOWN if s is UNKNOWN else TStr(unquote(s), flags_of(v))

    @staticmethod
    def _atob(v: Any = UNDEF) -> Any:
        s = to_str(v)
        if s is UNKNOWN:
            return UNKNOWN
        try:
            return TStr(base64.b64decode(s, validate=False).decode("latin-1"), flags_of(v))
        except (ValueError, base64.binascii.Error):
            return UNKNOWN

    @staticmethod
    def _math(fn: Callable, v: Any) -> Any:
        n = to_num(v)
        if n is UNKNOWN:
            return UNKNOWN
        if math.isnan(n) or math.isinf(n):
            return n
        return float(fn(n))

    @staticmethod
    def _num_to_string(n: float, radix: Any) -> Any:
        r = to_num(radix)
        if r is UNKNOWN:
            return UNKNOWN
        r = int(r)
        if r == 10 or n != int(n) or not 2 <= r <= 36:
            return TStr(num_to_str(n))
        digits = "0123456789abcdefghijklmnopqrstuvwxyz"
        k, out = abs(int(n)), ""
        while True:
            out = digits[k % r] + out
            k //= r
            if not k:
                break
        return TStr(("-" if n < 0 else "") + out)

    # -- rendering ------------------------------------------------------------
    def render(self, node: Optional[P.Node], as_target: bool = False) -> str:
        """Canonical text of ``node`` with folded constants substituted."""
        if node is None:
            return ""
        v = None if as_target else self.memo_get(node)
        if v is not None:
            if isinstance(v, str):
                return js_string_literal(v)
            if isinstance(v, float) and not isinstance(node, P.Assign):
                return num_to_str(v)
        if isinstance(node, P.Str):
            return js_string_literal(node.value)
        if isinstance(node, P.Num):
            return num_to_str(node.value)
        if isinstance(node, P.Ident):
            return node.name
        if isinstance(node, P.Member):
            base = self.render(node.obj)
            if node.computed:
                key = self.memo_get(node.prop)
                if isinstance(key, str) and re.fullmatch(r"[A-Za-z_$][\w$]*", key):
                    return f"{base}.{key}"
                return f"{base}[{self.render(node.prop)}]"
            return f"{base}.{node.prop.value}"
        if isinstance(node, P.Call):
            return f"{self.render(node.callee)}({', '.join(self.render(a) for a in node.args)})"
        if isinstance(node, P.Assign):
            return f"{self.render(node.target, as_target=True)} {node.op} {self.render(node.value)}"
        if isinstance(node, P.Binary):
            return f"{self.render(node.left)} {node.op} {self.render(node.right)}"
        return self.src[node.start:node.end] if node.end > node.start else "?"
