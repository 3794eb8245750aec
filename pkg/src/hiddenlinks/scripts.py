"""Static script analysis: hide effects and redirections recovered from inline scripts.

All scripts of a page run in order in one bounded :class:`~.jsinterp.Interpreter`
(browsers share one global scope per page), followed by deferred ``onload`` and
timer callbacks.  Nothing touches the DOM: style writes, ``document.write`` and
location changes are only recorded and then matched against the parsed tree.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Optional
from urllib.parse import urljoin

from .dom import ElementNode
from .jsinterp import DEFAULT_BUDGET, UNKNOWN, BudgetExhausted, Event, Interpreter
from .jsparse import decode_string_escapes, encode_hex, parse_program  # noqa: F401  (re-exported)
from .style import parse_declarations

OBFUSCATION_FLAGS = frozenset({"hex_escape", "concat", "array_indexing", "eval_decoder", "doc_write"})
JS_TYPES = frozenset({"", "text/javascript", "application/javascript", "application/x-javascript",
                      "text/ecmascript", "application/ecmascript", "text/jscript", "module"})


@dataclass(frozen=True)
class ScriptProgram:
    source: str
    source_node: int


@dataclass(frozen=True)
class HideEffect:
    target_kind: str  # by_id | by_class | written_wrapper
    target_name: Optional[str]
    property: str  # display_none | visibility_hidden
    evidence: str
    obfuscation: frozenset
    source_node: int
    # written_wrapper only: node ids in [lo, hi) sit inside the written element
    region: Optional[tuple[int, int]] = None

    def covers(self, node: ElementNode) -> bool:
        if self.target_kind == "written_wrapper":
            assert self.region is not None
            lo, hi = self.region
            return lo <= node.node_id < hi
        for el in (node, *node.ancestors()):
            if self.target_kind == "by_id" and el.element_id == self.target_name:
                return True
            if self.target_kind == "by_class" and self.target_name in el.classes:
                return True
        return False


@dataclass(frozen=True)
class RedirectionSignal:
    kind: str  # meta_refresh | script_location
    target: Optional[str]
    evidence: str


@dataclass
class ScriptAnalysis:
    programs: list[ScriptProgram]
    hide_effects: list[HideEffect] = field(default_factory=list)
    redirections: list[RedirectionSignal] = field(default_factory=list)
    decoded: list[str] = field(default_factory=list)
    status_handlers: dict[int, str] = field(default_factory=dict)  # anchor node_id -> evidence
    notes: list[str] = field(default_factory=list)


# ----------------------------------------------------------------------------
# program collection

def _is_js(node: ElementNode) -> bool:
    kind = (node.get("type") or "").strip().lower()
    lang = (node.get("language") or "").strip().lower()
    if kind and kind not in JS_TYPES:
        return False
    return not lang or lang.startswith(("javascript", "jscript", "ecmascript"))


def collect_programs(root: ElementNode) -> tuple[list[ScriptProgram], list[str]]:
    """Inline JavaScript programs in document order, plus a ``body onload`` handler."""
    programs: list[ScriptProgram] = []
    notes: list[str] = []
    onload: list[ScriptProgram] = []
    for node in root.iter():
        if node.tag == "script":
            if not _is_js(node):
                continue
            if node.get("src"):
                notes.append(f"external script ignored: {node.get('src')} (node {node.node_id})")
                if not (node.raw_text or "").strip():
                    continue
            programs.append(ScriptProgram(node.raw_text or "", node.node_id))
        elif node.tag in ("body", "frameset") and node.get("onload"):
            onload.append(ScriptProgram(node.get("onload") or "", node.node_id))
    return programs + onload, notes


# ----------------------------------------------------------------------------
# core run

def _run_all(programs: Iterable[ScriptProgram], budget: int) -> tuple[Interpreter, list[tuple[ScriptProgram, int, int]], list[str]]:
    """Execute every program in one interpreter; returns per-program event spans."""
    interp = Interpreter(budget)
    spans = []
    notes = []
    for prog in programs:
        start = len(interp.events)
        interp.steps = 0
        try:
            interp.run(prog.source)
            interp.run_deferred()
            interp.deferred.clear()
        except BudgetExhausted:
            notes.append(f"budget-exhausted (node {prog.source_node})")
        spans.append((prog, start, len(interp.events)))
    notes.extend(f"{n} (script)" for n in dict.fromkeys(interp.notes))
    return interp, spans, notes


def fold_string_expressions(program: ScriptProgram, budget: int = DEFAULT_BUDGET) -> dict[str, str]:
    """Constant string value of every expression/variable that folds to exactly one string.

    Keys are source slices (``'"q" + "l"'``, ``'_xa[1]'``) and top-level variable names.
    """
    interp = Interpreter(budget)
    try:
        interp.run(program.source)
    except BudgetExhausted:
        pass
    out = dict(interp.folded)
    for name, value in interp.global_scope.vars.items():
        if isinstance(value, str) and name not in ("undefined",):
            out.setdefault(name, str(value))
    return out


def evaluate_decoder_idioms(program: ScriptProgram, budget: int = DEFAULT_BUDGET) -> tuple[list[str], list[str]]:
    """Source text handed to ``eval`` with a constant argument, and flags.

    Flags: ``eval-nonconstant`` when an eval argument could not be folded,
    ``budget-exhausted`` when the step budget ran out.
    """
    interp = Interpreter(budget)
    flags: list[str] = []
    try:
        interp.run(program.source)
        interp.run_deferred()
    except BudgetExhausted:
        flags.append("budget-exhausted")
    if "eval-nonconstant" in interp.notes:
        flags.append("eval-nonconstant")
    return list(interp.decoded), flags


# ----------------------------------------------------------------------------
# hide effects

_TAG = re.compile(r"<\s*(/?)\s*([a-zA-Z][a-zA-Z0-9]*)([^>]*)>")
_STYLE_ATTR = re.compile(r"""style\s*=\s*(?:"([^"]*)"|'([^']*)'|([^\s>]+))""", re.I)


def _hiding_property(css: str) -> Optional[str]:
    prop = None
    for d in parse_declarations(css):
        value = d.value.strip().lower()
        if d.prop == "display":
            prop = "display_none" if value == "none" else (None if prop == "display_none" else prop)
        elif d.prop == "visibility":
            if value in ("hidden", "collapse"):
                prop = prop or "visibility_hidden"
    return prop


def _style_event_property(ev: Event) -> Optional[str]:
    value = ev.data.get("value")
    if value is UNKNOWN or not isinstance(value, str):
        return None
    v = value.strip().lower()
    prop = ev.data.get("prop")
    if prop == "display" and v == "none":
        return "display_none"
    if prop == "visibility" and v in ("hidden", "collapse"):
        return "visibility_hidden"
    if prop == "cssText":
        return _hiding_property(value)
    return None


def _target_exists(root: ElementNode, kind: str, name: str) -> bool:
    for el in root.iter():
        if kind == "id" and el.element_id == name:
            return True
        if kind == "class" and name in el.classes:
            return True
    return False


def _write_tags(text: str) -> list[tuple[bool, str, Optional[str]]]:
    """(is_close, tag, hiding property) for each tag in written markup."""
    out = []
    for m in _TAG.finditer(text):
        closing, tag, rest = m.group(1) == "/", m.group(2).lower(), m.group(3)
        prop = None
        if not closing:
            sm = _STYLE_ATTR.search(rest)
            if sm:
                prop = _hiding_property(next(g for g in sm.groups() if g is not None))
        out.append((closing, tag, prop))
    return out


def _effects_from_run(
    root: ElementNode,
    interp: Interpreter,
    spans: list[tuple[ScriptProgram, int, int]],
) -> list[HideEffect]:
    effects: list[HideEffect] = []
    nodes = {n.node_id: n for n in root.iter()}
    open_wrappers: list[tuple[str, Optional[str], ScriptProgram, Event]] = []
    for prog, start, end in spans:
        for ev in interp.events[start:end]:
            flags = frozenset(ev.flags) & OBFUSCATION_FLAGS
            if ev.kind == "style":
                prop = _style_event_property(ev)
                dom = ev.data.get("dom")
                if prop is None or dom is None or dom.kind not in ("id", "class"):
                    continue
                if not _target_exists(root, dom.kind, dom.name):
                    continue
                effects.append(HideEffect(f"by_{dom.kind}", dom.name, prop, ev.evidence, flags, prog.source_node))
            elif ev.kind == "write":
                text = ev.data.get("text")
                if not isinstance(text, str):
                    continue
                for closing, tag, prop in _write_tags(text):
                    if not closing:
                        open_wrappers.append((tag, prop, prog, ev))
                        continue
                    for i in range(len(open_wrappers) - 1, -1, -1):
                        if open_wrappers[i][0] != tag:
                            continue
                        _, oprop, oprog, oev = open_wrappers.pop(i)
                        if oprop is not None and oprog.source_node != prog.source_node:
                            opener = nodes.get(oprog.source_node)
                            lo = (opener.last_descendant_id() if opener else oprog.source_node) + 1
                            effects.append(HideEffect(
                                "written_wrapper", None, oprop, f"{oev.evidence} ... {ev.evidence}",
                                (frozenset(oev.flags) | frozenset(ev.flags)) & OBFUSCATION_FLAGS,
                                oprog.source_node, (lo, prog.source_node),
                            ))
                        del open_wrappers[i:]
                        break
    # never closed: the browser keeps the element open to the end of the script's parent
    for _tag, prop, prog, ev in open_wrappers:
        node = nodes.get(prog.source_node)
        if prop is None or node is None or node.tag != "script":
            continue
        parent = node.parent or node
        effects.append(HideEffect(
            "written_wrapper", None, prop, ev.evidence, frozenset(ev.flags) & OBFUSCATION_FLAGS,
            prog.source_node, (node.last_descendant_id() + 1, parent.last_descendant_id() + 1),
        ))
    unique = list(dict.fromkeys(effects))
    return unique


def extract_hide_effects(programs: list[ScriptProgram], root: ElementNode, budget: int = DEFAULT_BUDGET) -> list[HideEffect]:
    interp, spans, _ = _run_all(programs, budget)
    return _effects_from_run(root, interp, spans)


# ----------------------------------------------------------------------------
# redirection

_REFRESH = re.compile(r"^\s*[\d.]*\s*[;,]?\s*(?:url\s*=\s*)?(.*)$", re.I | re.S)


def parse_meta_refresh(content: str) -> Optional[str]:
    """Target URL of a refresh ``content`` value, or None when it only reloads."""
    m = _REFRESH.match(content or "")
    if not m:
        return None
    target = m.group(1).strip().strip("'\"").strip()
    return target or None


def _redirections_from_run(
    root: ElementNode, interp: Interpreter, base_url: Optional[str]
) -> list[RedirectionSignal]:
    out: list[RedirectionSignal] = []
    for node in root.iter():
        if node.tag == "meta" and (node.get("http-equiv") or "").strip().lower() == "refresh":
            target = parse_meta_refresh(node.get("content") or "")
            if target is None:
                continue
            resolved = urljoin(base_url, target) if base_url else target
            out.append(RedirectionSignal("meta_refresh", resolved, f'meta refresh "{node.get("content")}" (node {node.node_id})'))
    for ev in interp.events:
        if ev.kind != "redirect":
            continue
        target = ev.data.get("target")
        if not isinstance(target, str):
            continue
        resolved = urljoin(base_url, str(target)) if base_url else str(target)
        out.append(RedirectionSignal("script_location", resolved, ev.evidence))
    return list(dict.fromkeys(out))


def detect_redirection(
    root: ElementNode, programs: list[ScriptProgram], base_url: Optional[str] = None, budget: int = DEFAULT_BUDGET
) -> list[RedirectionSignal]:
    interp, _, _ = _run_all(programs, budget)
    return _redirections_from_run(root, interp, base_url)


# ----------------------------------------------------------------------------
# status suppression handlers (plain-text disguise signal)

def status_suppressors(root: ElementNode, budget: int = DEFAULT_BUDGET) -> dict[int, str]:
    """Anchors whose mouse-over handler overwrites ``window.status``."""
    out: dict[int, str] = {}
    for node in root.iter():
        if node.tag != "a":
            continue
        handler = node.get("onmouseover")
        if not handler:
            continue
        interp = Interpreter(budget)
        try:
            interp.run(handler)
        except BudgetExhausted:
            continue
        for ev in interp.events:
            if ev.kind == "status":
                out[node.node_id] = ev.evidence
                break
    return out


def analyze_scripts(root: ElementNode, base_url: Optional[str] = None, budget: int = DEFAULT_BUDGET) -> ScriptAnalysis:
    """Run every inline script once and derive hide effects, redirections and decoded payloads."""
    programs, notes = collect_programs(root)
    interp, spans, run_notes = _run_all(programs, budget)
    return ScriptAnalysis(
        programs=programs,
        hide_effects=_effects_from_run(root, interp, spans),
        redirections=_redirections_from_run(root, interp, base_url),
        decoded=list(interp.decoded),
        status_handlers=status_suppressors(root, budget),
        notes=notes + run_notes,
    )
