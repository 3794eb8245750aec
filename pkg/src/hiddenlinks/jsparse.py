"""Tokenizer and recursive-descent parser for the JavaScript that hides links.

Covers ES3-era statements plus a few later forms (let/const, arrow functions,
template strings without substitutions).  Anything else raises
:class:`JSSyntaxError`; :func:`parse_program` recovers by skipping to the next
statement boundary, so one odd line does not cost the whole script.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional


class JSSyntaxError(ValueError):
    pass


# ----------------------------------------------------------------------------
# escapes

_HEX = "0123456789abcdefABCDEF"
_SIMPLE_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "b": "\b", "f": "\f", "v": "\v"}


def decode_string_escapes_report(s: str) -> tuple[str, bool]:
    """Decode ``\\xNN``, ``\\uNNNN`` and bare two-digit ``\\NN`` hex escapes.

    Returns the decoded text and whether a malformed ``\\x``/``\\u`` escape was
    left in place.  Other backslashes pass through untouched.
    """
    out: list[str] = []
    malformed = False
    i, n = 0, len(s)
    while i < n:
        ch = s[i]
        if ch != "\\" or i + 1 >= n:
            out.append(ch)
            i += 1
            continue
        nxt = s[i + 1]
        if nxt == "x":
            digits = s[i + 2:i + 4]
            if len(digits) == 2 and all(c in _HEX for c in digits):
                out.append(chr(int(digits, 16)))
                i += 4
            else:
                malformed = True
                out.append(s[i:i + 2])
                i += 2
        elif nxt == "u":
            digits = s[i + 2:i + 6]
            if len(digits) == 4 and all(c in _HEX for c in digits):
                out.append(chr(int(digits, 16)))
                i += 6
            else:
                malformed = True
                out.append(s[i:i + 2])
                i += 2
        elif nxt.isdigit() and i + 2 < n and s[i + 2] in _HEX:
            out.append(chr(int(s[i + 1:i + 3], 16)))
            i += 3
        else:
            out.append(s[i:i + 2])
            i += 2
    return "".join(out), malformed


def decode_string_escapes(s: str) -> str:
    return decode_string_escapes_report(s)[0]


def encode_hex(s: str) -> str:
    """Every character as ``\\xNN`` (code points below 256 only)."""
    return "".join(f"\\x{ord(c):02x}" for c in s)


def _decode_js_literal(body: str) -> tuple[str, bool]:
    """Decode a JS string literal body; the flag reports hex/unicode escapes."""
    out: list[str] = []
    hexed = False
    i, n = 0, len(body)
    while i < n:
        ch = body[i]
        if ch != "\\" or i + 1 >= n:
            out.append(ch)
            i += 1
            continue
        nxt = body[i + 1]
        if nxt in _SIMPLE_ESCAPES:
            out.append(_SIMPLE_ESCAPES[nxt])
            i += 2
        elif nxt in "xu" or (nxt.isdigit() and i + 2 < n and body[i + 2] in _HEX):
            if nxt == "u" and body[i + 2:i + 3] == "{":
                end = body.find("}", i + 3)
                try:
                    out.append(chr(int(body[i + 3:end], 16)))
                    hexed = True
                    i = end + 1
                    continue
                except ValueError:
                    pass
            width = {"x": 4, "u": 6}.get(nxt, 3)
            decoded, bad = decode_string_escapes_report(body[i:i + width])
            out.append(decoded if not bad else nxt)
            hexed = hexed or not bad
            i += width if not bad else 2
        elif nxt == "0":
            out.append("\0")
            i += 2
        elif nxt in "\r\n\u2028\u2029":
            i += 2
            if nxt == "\r" and body[i:i + 1] == "\n":
                i += 1
        else:
            out.append(nxt)
            i += 2
    return "".join(out), hexed


# ----------------------------------------------------------------------------
# tokens

@dataclass
class Token:
    kind: str  # num | str | name | punct | regex | template | eof
    value: object
    start: int
    end: int
    nl_before: bool = False
    hexed: bool = False


_PUNCT = sorted(
    """>>>= ... === !== **= <<= >>= >>> => == != <= >= && || ?? ?. ++ -- += -= *= /= %= &= |= ^= << >> **
    { } ( ) [ ] ; , < > + - * / % & | ^ ! ~ ? : = .""".split(),
    key=len,
    reverse=True,
)
_NUM = re.compile(r"0[xX][0-9a-fA-F]+|(?:\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)")
_NAME = re.compile("[A-Za-z_$\u00c0-\uffff][\\w$\u00c0-\uffff]*")
KEYWORDS = frozenset(
    "var let const function return if else for while do break continue new typeof void delete "
    "instanceof in this null true false throw try catch finally switch case default".split()
)
_REGEX_PRECEDERS = frozenset("( , = : [ ! & | ? { } ; + - * % < > ~ ^ return typeof case do else in new delete void throw".split())


def tokenize(src: str) -> list[Token]:
    toks: list[Token] = []
    i, n = 0, len(src)
    nl = False
    line_start = True
    while i < n:
        ch = src[i]
        if ch in "\n\r\u2028\u2029":
            nl = True
            line_start = True
            i += 1
            continue
        if ch.isspace():
            i += 1
            continue
        if src.startswith("//", i) or src.startswith("<!--", i) or (line_start and src.startswith("-->", i)):
            while i < n and src[i] not in "\n\r":
                i += 1
            continue
        if src.startswith("/*", i):
            end = src.find("*/", i + 2)
            end = n if end < 0 else end + 2
            if "\n" in src[i:end]:
                nl = True
            i = end
            continue
        line_start = False
        start = i
        if ch in "\"'":
            j = i + 1
            while j < n and src[j] != ch:
                if src[j] == "\\":
                    j += 1
                elif src[j] in "\n\r":
                    raise JSSyntaxError(f"unterminated string at {i}")
                j += 1
            if j >= n:
                raise JSSyntaxError(f"unterminated string at {i}")
            value, hexed = _decode_js_literal(src[i + 1:j])
            toks.append(Token("str", value, start, j + 1, nl, hexed))
            i = j + 1
        elif ch == "`":
            j = i + 1
            while j < n and src[j] != "`":
                j += 2 if src[j] == "\\" else 1
            body = src[i + 1:j]
            if "${" in body:
                toks.append(Token("template", body, start, j + 1, nl))
            else:
                value, hexed = _decode_js_literal(body)
                toks.append(Token("str", value, start, j + 1, nl, hexed))
            i = j + 1
        elif ch.isdigit() or (ch == "." and i + 1 < n and src[i + 1].isdigit()):
            m = _NUM.match(src, i)
            text = m.group(0)
            value = float(int(text, 16)) if text[:2].lower() == "0x" else float(text)
            toks.append(Token("num", value, start, m.end(), nl))
            i = m.end()
        elif _NAME.match(src, i):
            m = _NAME.match(src, i)
            toks.append(Token("name", m.group(0), start, m.end(), nl))
            i = m.end()
        elif ch == "/" and _regex_allowed(toks):
            j = i + 1
            in_class = False
            while j < n and (in_class or src[j] != "/"):
                if src[j] == "\\":
                    j += 1
                elif src[j] == "[":
                    in_class = True
                elif src[j] == "]":
                    in_class = False
                elif src[j] in "\n\r":
                    raise JSSyntaxError(f"unterminated regex at {i}")
                j += 1
            j += 1
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            toks.append(Token("regex", src[i:j], start, j, nl))
            i = j
        else:
            for p in _PUNCT:
                if src.startswith(p, i):
                    toks.append(Token("punct", p, start, i + len(p), nl))
                    i += len(p)
                    break
            else:
                raise JSSyntaxError(f"unexpected character {ch!r} at {i}")
        nl = False
    toks.append(Token("eof", None, n, n, nl))
    return toks


def _regex_allowed(toks: list[Token]) -> bool:
    if not toks:
        return True
    last = toks[-1]
    if last.kind == "punct":
        return last.value in _REGEX_PRECEDERS
    if last.kind == "name":
        return last.value in _REGEX_PRECEDERS
    return False


# ----------------------------------------------------------------------------
# AST

@dataclass(eq=False)
class Node:
    start: int = field(default=0, init=False, repr=False)
    end: int = field(default=0, init=False, repr=False)


@dataclass(eq=False)
class Num(Node):
    value: float


@dataclass(eq=False)
class Str(Node):
    value: str
    hexed: bool = False


@dataclass(eq=False)
class Ident(Node):
    name: str


@dataclass(eq=False)
class Literal(Node):
    value: object  # True / False / None (null) / "this" / opaque regex/template text
    kind: str = "const"


@dataclass(eq=False)
class ArrayLit(Node):
    elements: list


@dataclass(eq=False)
class ObjectLit(Node):
    props: list  # (key, expr)


@dataclass(eq=False)
class FuncExpr(Node):
    name: Optional[str]
    params: list
    body: list
    arrow_expr: Optional[Node] = None


@dataclass(eq=False)
class Member(Node):
    obj: Node
    prop: Node
    computed: bool


@dataclass(eq=False)
class Call(Node):
    callee: Node
    args: list
    new: bool = False


@dataclass(eq=False)
class Assign(Node):
    op: str
    target: Node
    value: Node


@dataclass(eq=False)
class Binary(Node):
    op: str
    left: Node
    right: Node


@dataclass(eq=False)
class Unary(Node):
    op: str
    arg: Node


@dataclass(eq=False)
class Update(Node):
    op: str
    prefix: bool
    arg: Node


@dataclass(eq=False)
class Cond(Node):
    test: Node
    cons: Node
    alt: Node


@dataclass(eq=False)
class Seq(Node):
    exprs: list


# statements

@dataclass(eq=False)
class VarDecl(Node):
    kind: str
    decls: list  # (name, init or None)


@dataclass(eq=False)
class FuncDecl(Node):
    name: str
    params: list
    body: list


@dataclass(eq=False)
class Return(Node):
    arg: Optional[Node]


@dataclass(eq=False)
class If(Node):
    test: Node
    cons: Node
    alt: Optional[Node]


@dataclass(eq=False)
class For(Node):
    init: Optional[Node]
    test: Optional[Node]
    update: Optional[Node]
    body: Node


@dataclass(eq=False)
class ForIn(Node):
    name: str
    declare: bool
    iterable: Node
    body: Node


@dataclass(eq=False)
class While(Node):
    test: Node
    body: Node
    do: bool = False


@dataclass(eq=False)
class Block(Node):
    body: list


@dataclass(eq=False)
class ExprStmt(Node):
    expr: Node


@dataclass(eq=False)
class Jump(Node):
    kind: str  # break | continue


@dataclass(eq=False)
class Throw(Node):
    arg: Node


@dataclass(eq=False)
class Try(Node):
    block: Block
    param: Optional[str]
    handler: Optional[Block]
    finalizer: Optional[Block]


@dataclass(eq=False)
class Switch(Node):
    disc: Node
    cases: list  # (test or None, [stmts])


@dataclass(eq=False)
class Empty(Node):
    pass


@dataclass
class Program:
    body: list
    source: str
    errors: list = field(default_factory=list)


# ----------------------------------------------------------------------------
# parser

_BINARY_PREC = {
    "??": 4, "||": 4, "&&": 5, "|": 6, "^": 7, "&": 8,
    "==": 9, "!=": 9, "===": 9, "!==": 9,
    "<": 10, ">": 10, "<=": 10, ">=": 10, "instanceof": 10, "in": 10,
    "<<": 11, ">>": 11, ">>>": 11, "+": 12, "-": 12, "*": 13, "/": 13, "%": 13, "**": 14,
}
_ASSIGN_OPS = frozenset("= += -= *= /= %= &= |= ^= <<= >>= >>>= **=".split())
MAX_DEPTH = 150


class Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks = tokenize(src)
        self.i = 0
        self.depth = 0

    # -- token helpers ----------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def is_(self, value: str, kind: Optional[str] = None) -> bool:
        t = self.tok
        if kind is None:
            return t.kind in ("punct", "name") and t.value == value
        return t.kind == kind and t.value == value

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, value: str) -> Token:
        if not self.is_(value):
            raise JSSyntaxError(f"expected {value!r} at {self.tok.start}, got {self.tok.value!r}")
        return self.advance()

    def name(self) -> str:
        t = self.tok
        if t.kind != "name":
            raise JSSyntaxError(f"expected identifier at {t.start}")
        self.advance()
        return t.value

    def semicolon(self) -> None:
        if self.is_(";", "punct"):
            self.advance()
        elif self.is_("}", "punct") or self.tok.kind == "eof" or self.tok.nl_before:
            return
        else:
            raise JSSyntaxError(f"expected ';' at {self.tok.start}, got {self.tok.value!r}")

    def _span(self, node: Node, start: int) -> Node:
        node.start = start
        node.end = self.toks[self.i - 1].end if self.i > 0 else start
        return node

    # -- statements -------------------------------------------------------
    def program(self) -> Program:
        body, errors = self.statement_list(top=True)
        return Program(body, self.src, errors)

    def statement_list(self, top: bool = False) -> tuple[list, list]:
        body, errors = [], []
        while self.tok.kind != "eof" and not (not top and self.is_("}", "punct")):
            mark = self.i
            try:
                body.append(self.statement())
            except (JSSyntaxError, RecursionError) as exc:
                errors.append(str(exc))
                self.i = max(self.i, mark)
                self.recover(top)
        return body, errors

    def recover(self, top: bool) -> None:
        depth = 0
        start = self.i
        while self.tok.kind != "eof":
            t = self.tok
            if self.i > start and t.nl_before and depth == 0:
                return
            if t.kind == "punct":
                if t.value in "([{":
                    depth += 1
                elif t.value in ")]}":
                    if depth == 0:
                        if top or t.value != "}":
                            self.advance()
                        return
                    depth -= 1
                elif t.value == ";" and depth == 0:
                    self.advance()
                    return
            self.advance()

    def statement(self) -> Node:
        t = self.tok
        start = t.start
        if t.kind == "punct":
            if t.value == "{":
                self.advance()
                body, errors = self.statement_list()
                self.expect("}")
                if errors:
                    raise JSSyntaxError(errors[0])
                return self._span(Block(body), start)
            if t.value == ";":
                self.advance()
                return self._span(Empty(), start)
        if t.kind == "name":
            kw = t.value
            if kw in ("var", "let", "const") and self.peek().kind == "name":
                node = self.var_decl()
                self.semicolon()
                return self._span(node, start)
            if kw == "function" and self.peek().kind == "name":
                self.advance()
                name = self.name()
                params, body = self.function_rest()
                return self._span(FuncDecl(name, params, body), start)
            if kw == "return":
                self.advance()
                arg = None
                if not (self.is_(";", "punct") or self.is_("}", "punct") or self.tok.kind == "eof" or self.tok.nl_before):
                    arg = self.expression()
                self.semicolon()
                return self._span(Return(arg), start)
            if kw == "if":
                self.advance()
                self.expect("(")
                test = self.expression()
                self.expect(")")
                cons = self.statement()
                alt = None
                if self.is_("else", "name"):
                    self.advance()
                    alt = self.statement()
                return self._span(If(test, cons, alt), start)
            if kw == "for":
                return self._span(self.for_statement(), start)
            if kw == "while":
                self.advance()
                self.expect("(")
                test = self.expression()
                self.expect(")")
                return self._span(While(test, self.statement()), start)
            if kw == "do":
                self.advance()
                body = self.statement()
                self.expect("while")
                self.expect("(")
                test = self.expression()
                self.expect(")")
                if self.is_(";", "punct"):
                    self.advance()
                return self._span(While(test, body, do=True), start)
            if kw in ("break", "continue"):
                self.advance()
                if self.tok.kind == "name" and not self.tok.nl_before:
                    self.advance()  # labels are ignored
                self.semicolon()
                return self._span(Jump(kw), start)
            if kw == "throw":
                self.advance()
                arg = self.expression()
                self.semicolon()
                return self._span(Throw(arg), start)
            if kw == "try":
                return self._span(self.try_statement(), start)
            if kw == "switch":
                return self._span(self.switch_statement(), start)
            if self.peek().kind == "punct" and self.peek().value == ":" and kw not in KEYWORDS:
                self.advance()
                self.advance()
                return self.statement()  # labelled statement
        expr = self.expression()
        self.semicolon()
        return self._span(ExprStmt(expr), start)

    def var_decl(self) -> VarDecl:
        kind = self.advance().value
        decls = []
        while True:
            name = self.name()
            init = None
            if self.is_("=", "punct"):
                self.advance()
                init = self.assignment(no_in=False)
            decls.append((name, init))
            if not self.is_(",", "punct"):
                break
            self.advance()
        return VarDecl(kind, decls)

    def for_statement(self) -> Node:
        self.expect("for")
        self.expect("(")
        init = None
        if self.tok.kind == "name" and self.tok.value in ("var", "let", "const"):
            if self.peek(2).kind == "name" and self.peek(2).value in ("in", "of"):
                self.advance()
                name = self.name()
                self.advance()
                iterable = self.expression()
                self.expect(")")
                return ForIn(name, True, iterable, self.statement())
            init = self.var_decl()
        elif self.tok.kind == "name" and self.peek().kind == "name" and self.peek().value in ("in", "of"):
            name = self.name()
            self.advance()
            iterable = self.expression()
            self.expect(")")
            return ForIn(name, False, iterable, self.statement())
        elif not self.is_(";", "punct"):
            init = ExprStmt(self.expression())
        self.expect(";")
        test = None if self.is_(";", "punct") else self.expression()
        self.expect(";")
        update = None if self.is_(")", "punct") else self.expression()
        self.expect(")")
        return For(init, test, update, self.statement())

    def try_statement(self) -> Try:
        self.expect("try")
        block = self.statement()
        param = handler = finalizer = None
        if self.is_("catch", "name"):
            self.advance()
            if self.is_("(", "punct"):
                self.advance()
                param = self.name()
                self.expect(")")
            handler = self.statement()
        if self.is_("finally", "name"):
            self.advance()
            finalizer = self.statement()
        return Try(block, param, handler, finalizer)

    def switch_statement(self) -> Switch:
        self.expect("switch")
        self.expect("(")
        disc = self.expression()
        self.expect(")")
        self.expect("{")
        cases = []
        while not self.is_("}", "punct"):
            if self.is_("case", "name"):
                self.advance()
                test = self.expression()
            else:
                self.expect("default")
                test = None
            self.expect(":")
            body = []
            while not (self.is_("case", "name") or self.is_("default", "name") or self.is_("}", "punct")):
                if self.tok.kind == "eof":
                    raise JSSyntaxError("unterminated switch")
                body.append(self.statement())
            cases.append((test, body))
        self.expect("}")
        return Switch(disc, cases)

    def function_rest(self) -> tuple[list, list]:
        self.expect("(")
        params = []
        while not self.is_(")", "punct"):
            params.append(self.name())
            if self.is_("=", "punct"):  # default values are dropped
                self.advance()
                self.assignment()
            if not self.is_(",", "punct"):
                break
            self.advance()
        self.expect(")")
        self.expect("{")
        body, errors = self.statement_list()
        self.expect("}")
        if errors:
            raise JSSyntaxError(errors[0])
        return params, body

    # -- expressions ------------------------------------------------------
    def expression(self) -> Node:
        start = self.tok.start
        first = self.assignment()
        if not self.is_(",", "punct"):
            return first
        exprs = [first]
        while self.is_(",", "punct"):
            self.advance()
            exprs.append(self.assignment())
        return self._span(Seq(exprs), start)

    def assignment(self, no_in: bool = False) -> Node:
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise JSSyntaxError("expression nesting too deep")
        try:
            start = self.tok.start
            arrow = self.try_arrow()
            if arrow is not None:
                return self._span(arrow, start)
            left = self.conditional()
            if self.tok.kind == "punct" and self.tok.value in _ASSIGN_OPS:
                if not isinstance(left, (Ident, Member)):
                    raise JSSyntaxError(f"invalid assignment target at {start}")
                op = self.advance().value
                value = self.assignment()
                return self._span(Assign(op, left, value), start)
            return left
        finally:
            self.depth -= 1

    def try_arrow(self) -> Optional[FuncExpr]:
        t = self.tok
        if t.kind == "name" and t.value not in KEYWORDS and self.peek().kind == "punct" and self.peek().value == "=>":
            self.advance()
            self.advance()
            return self.arrow_body([t.value])
        if not self.is_("(", "punct"):
            return None
        j, params = self.i + 1, []
        while True:
            tj = self.toks[j]
            if tj.kind == "punct" and tj.value == ")":
                break
            if tj.kind != "name":
                return None
            params.append(tj.value)
            j += 1
            if self.toks[j].kind == "punct" and self.toks[j].value == ",":
                j += 1
        after = self.toks[j + 1] if j + 1 < len(self.toks) else None
        if after is None or after.kind != "punct" or after.value != "=>":
            return None
        self.i = j + 2
        return self.arrow_body(params)

    def arrow_body(self, params: list) -> FuncExpr:
        if self.is_("{", "punct"):
            self.advance()
            body, errors = self.statement_list()
            self.expect("}")
            if errors:
                raise JSSyntaxError(errors[0])
            return FuncExpr(None, params, body)
        expr = self.assignment()
        return FuncExpr(None, params, [], arrow_expr=expr)

    def conditional(self) -> Node:
        start = self.tok.start
        test = self.binary(0)
        if not self.is_("?", "punct"):
            return test
        self.advance()
        cons = self.assignment()
        self.expect(":")
        alt = self.assignment()
        return self._span(Cond(test, cons, alt), start)

    def binary(self, min_prec: int) -> Node:
        start = self.tok.start
        left = self.unary()
        while True:
            t = self.tok
            op = t.value if t.kind in ("punct", "name") else None
            prec = _BINARY_PREC.get(op) if isinstance(op, str) else None
            if prec is None or prec <= min_prec:
                return left
            self.advance()
            right = self.binary(prec - 1 if op == "**" else prec)
            left = self._span(Binary(op, left, right), start)

    def unary(self) -> Node:
        t = self.tok
        start = t.start
        if (t.kind == "punct" and t.value in ("!", "-", "+", "~")) or (
            t.kind == "name" and t.value in ("typeof", "void", "delete")
        ):
            self.advance()
            self.depth += 1
            if self.depth > MAX_DEPTH:
                raise JSSyntaxError("expression nesting too deep")
            try:
                return self._span(Unary(t.value, self.unary()), start)
            finally:
                self.depth -= 1
        if t.kind == "punct" and t.value in ("++", "--"):
            self.advance()
            return self._span(Update(t.value, True, self.unary()), start)
        expr = self.postfix()
        return expr

    def postfix(self) -> Node:
        start = self.tok.start
        expr = self.call_member()
        t = self.tok
        if t.kind == "punct" and t.value in ("++", "--") and not t.nl_before:
            self.advance()
            return self._span(Update(t.value, False, expr), start)
        return expr

    def call_member(self) -> Node:
        start = self.tok.start
        if self.is_("new", "name"):
            self.advance()
            callee = self.member_only()
            args = self.arguments() if self.is_("(", "punct") else []
            expr: Node = self._span(Call(callee, args, new=True), start)
        else:
            expr = self.primary()
        while True:
            t = self.tok
            if t.kind != "punct":
                return expr
            if t.value in (".", "?."):
                self.advance()
                if self.is_("(", "punct") or self.is_("[", "punct"):
                    continue
                nt = self.advance()
                if nt.kind != "name":
                    raise JSSyntaxError(f"expected property name at {nt.start}")
                prop = Str(nt.value)
                prop.start, prop.end = nt.start, nt.end
                expr = self._span(Member(expr, prop, False), start)
            elif t.value == "[":
                self.advance()
                prop = self.expression()
                self.expect("]")
                expr = self._span(Member(expr, prop, True), start)
            elif t.value == "(":
                expr = self._span(Call(expr, self.arguments()), start)
            else:
                return expr

    def member_only(self) -> Node:
        start = self.tok.start
        expr = self.primary()
        while self.tok.kind == "punct" and self.tok.value in (".", "["):
            if self.advance().value == ".":
                nt = self.advance()
                prop = Str(str(nt.value))
                expr = self._span(Member(expr, prop, False), start)
            else:
                prop = self.expression()
                self.expect("]")
                expr = self._span(Member(expr, prop, True), start)
        return expr

    def arguments(self) -> list:
        self.expect("(")
        args = []
        while not self.is_(")", "punct"):
            if self.is_("...", "punct"):
                self.advance()
            args.append(self.assignment())
            if not self.is_(",", "punct"):
                break
            self.advance()
        self.expect(")")
        return args

    def primary(self) -> Node:
        t = self.tok
        start = t.start
        if t.kind == "num":
            self.advance()
            return self._span(Num(t.value), start)
        if t.kind == "str":
            self.advance()
            return self._span(Str(t.value, t.hexed), start)
        if t.kind in ("regex", "template"):
            self.advance()
            return self._span(Literal(t.value, t.kind), start)
        if t.kind == "name":
            if t.value == "function":
                self.advance()
                name = self.name() if self.tok.kind == "name" else None
                params, body = self.function_rest()
                return self._span(FuncExpr(name, params, body), start)
            consts = {"true": True, "false": False, "null": None}
            if t.value in consts:
                self.advance()
                return self._span(Literal(consts[t.value]), start)
            if t.value == "this":
                self.advance()
                return self._span(Literal("this", "this"), start)
            if t.value in KEYWORDS and t.value not in ("undefined",):
                raise JSSyntaxError(f"unexpected keyword {t.value!r} at {t.start}")
            self.advance()
            return self._span(Ident(t.value), start)
        if t.kind == "punct":
            if t.value == "(":
                self.advance()
                expr = self.expression()
                self.expect(")")
                return expr
            if t.value == "[":
                self.advance()
                elements = []
                while not self.is_("]", "punct"):
                    if self.is_(",", "punct"):
                        self.advance()
                        elements.append(None)
                        continue
                    elements.append(self.assignment())
                    if not self.is_(",", "punct"):
                        break
                    self.advance()
                self.expect("]")
                return self._span(ArrayLit(elements), start)
            if t.value == "{":
                self.advance()
                props = []
                while not self.is_("}", "punct"):
                    kt = self.advance()
                    if kt.kind not in ("name", "str", "num"):
                        raise JSSyntaxError(f"bad object key at {kt.start}")
                    key = kt.value if kt.kind != "num" else _num_to_str(kt.value)
                    if self.is_(":", "punct"):
                        self.advance()
                        props.append((key, self.assignment()))
                    else:
                        ident = Ident(str(key))
                        ident.start, ident.end = kt.start, kt.end
                        props.append((key, ident))
                    if not self.is_(",", "punct"):
                        break
                    self.advance()
                self.expect("}")
                return self._span(ObjectLit(props), start)
        raise JSSyntaxError(f"unexpected token {t.value!r} at {t.start}")


def _num_to_str(v: float) -> str:
    return str(int(v)) if v == int(v) else repr(v)


def parse_program(src: str) -> Program:
    """Parse ``src``; statements that fail to parse are skipped and listed in ``errors``."""
    try:
        parser = Parser(src)
    except JSSyntaxError as exc:
        return Program([], src, [str(exc)])
    return parser.program()
