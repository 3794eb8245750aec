"""CSS subset: colors, stylesheet parsing, selector matching and the cascade.

Only the properties needed to judge link visibility are computed.  Lengths are
CSS px floats; ``None`` stands for ``auto`` (or ``normal`` for line-height,
``transparent`` for background colors).
"""

from __future__ import annotations

import ast
import math
import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Union

from .dom import ElementNode

# ----------------------------------------------------------------------------
# colors

_NAMED = """
aliceblue f0f8ff antiquewhite faebd7 aqua 00ffff aquamarine 7fffd4 azure f0ffff
beige f5f5dc bisque ffe4c4 black 000000 blanchedalmond ffebcd blue 0000ff
blueviolet 8a2be2 brown a52a2a burlywood deb887 cadetblue 5f9ea0 chartreuse 7fff00
chocolate d2691e coral ff7f50 cornflowerblue 6495ed cornsilk fff8dc crimson dc143c
cyan 00ffff darkblue 00008b darkcyan 008b8b darkgoldenrod b8860b darkgray a9a9a9
darkgreen 006400 darkgrey a9a9a9 darkkhaki bdb76b darkmagenta 8b008b
darkolivegreen 556b2f darkorange ff8c00 darkorchid 9932cc darkred 8b0000
darksalmon e9967a darkseagreen 8fbc8f darkslateblue 483d8b darkslategray 2f4f4f
darkslategrey 2f4f4f darkturquoise 00ced1 darkviolet 9400d3 deeppink ff1493
deepskyblue 00bfff dimgray 696969 dimgrey 696969 dodgerblue 1e90ff firebrick b22222
floralwhite fffaf0 forestgreen 228b22 fuchsia ff00ff gainsboro dcdcdc
ghostwhite f8f8ff gold ffd700 goldenrod daa520 gray 808080 green 008000
greenyellow adff2f grey 808080 honeydew f0fff0 hotpink ff69b4 indianred cd5c5c
indigo 4b0082 ivory fffff0 khaki f0e68c lavender e6e6fa lavenderblush fff0f5
lawngreen 7cfc00 lemonchiffon fffacd lightblue add8e6 lightcoral f08080
lightcyan e0ffff lightgoldenrodyellow fafad2 lightgray d3d3d3 lightgreen 90ee90
lightgrey d3d3d3 lightpink ffb6c1 lightsalmon ffa07a lightseagreen 20b2aa
lightskyblue 87cefa lightslategray 778899 lightslategrey 778899 lightsteelblue b0c4de
lightyellow ffffe0 lime 00ff00 limegreen 32cd32 linen faf0e6 magenta ff00ff
maroon 800000 mediumaquamarine 66cdaa mediumblue 0000cd mediumorchid ba55d3
mediumpurple 9370db mediumseagreen 3cb371 mediumslateblue 7b68ee
mediumspringgreen 00fa9a mediumturquoise 48d1cc mediumvioletred c71585
midnightblue 191970 mintcream f5fffa mistyrose ffe4e1 moccasin ffe4b5
navajowhite ffdead navy 000080 oldlace fdf5e6 olive 808000 olivedrab 6b8e23
orange ffa500 orangered ff4500 orchid da70d6 palegoldenrod eee8aa palegreen 98fb98
paleturquoise afeeee palevioletred db7093 papayawhip ffefd5 peachpuff ffdab9
peru cd853f pink ffc0cb plum dda0dd powderblue b0e0e6 purple 800080
rebeccapurple 663399 red ff0000 rosybrown bc8f8f royalblue 4169e1
saddlebrown 8b4513 salmon fa8072 sandybrown f4a460 seagreen 2e8b57
seashell fff5ee sienna a0522d silver c0c0c0 skyblue 87ceeb slateblue 6a5acd
slategray 708090 slategrey 708090 snow fffafa springgreen 00ff7f steelblue 4682b4
tan d2b48c teal 008080 thistle d8bfd8 tomato ff6347 turquoise 40e0d0 violet ee82ee
wheat f5deb3 white ffffff whitesmoke f5f5f5 yellow ffff00 yellowgreen 9acd32
"""
NAMED_COLORS = dict(zip(_NAMED.split()[::2], _NAMED.split()[1::2]))


@dataclass(frozen=True)
class ColorValue:
    r: int
    g: int
    b: int
    a: float = 1.0

    def __post_init__(self) -> None:
        for ch in (self.r, self.g, self.b):
            if not 0 <= ch <= 255:
                raise ValueError(f"color channel out of range: {ch}")
        if not 0.0 <= self.a <= 1.0:
            raise ValueError(f"alpha out of range: {self.a}")

    def hex(self) -> str:
        return f"#{self.r:02x}{self.g:02x}{self.b:02x}"

    def __str__(self) -> str:
        return f"rgb({self.r},{self.g},{self.b})"


BLACK = ColorValue(0, 0, 0)
WHITE = ColorValue(255, 255, 255)
LINK_BLUE = ColorValue(0, 0, 0xEE)

_RGB_FUNC = re.compile(r"rgba?\(\s*([^)]*)\)$")
TRANSPARENT = "transparent"


def _channel(token: str) -> int:
    token = token.strip()
    if token.endswith("%"):
        return max(0, min(255, round(float(token[:-1]) * 2.55)))
    return max(0, min(255, round(float(token))))


def parse_color(value: str) -> Union[ColorValue, str, None]:
    """Return a ColorValue, ``TRANSPARENT``, or None when unparseable."""
    v = value.strip().lower()
    if v == "transparent":
        return TRANSPARENT
    if v in NAMED_COLORS:
        v = "#" + NAMED_COLORS[v]
    if not v.startswith("#") and re.fullmatch(r"[0-9a-f]{6}|[0-9a-f]{3}", v):
        v = "#" + v  # quirks-mode hashless hex
    if v.startswith("#"):
        h = v[1:]
        if len(h) == 3 and re.fullmatch(r"[0-9a-f]{3}", h):
            h = "".join(c * 2 for c in h)
        if len(h) == 6 and re.fullmatch(r"[0-9a-f]{6}", h):
            return ColorValue(int(h[0:2], 16), int(h[2:4], 16), int(h[4:6], 16))
        return None
    m = _RGB_FUNC.match(v)
    if m:
        parts = [p for p in re.split(r"[\s,/]+", m.group(1)) if p]
        try:
            if len(parts) == 3:
                return ColorValue(*(_channel(p) for p in parts))
            if len(parts) == 4:
                a = parts[3]
                alpha = float(a[:-1]) / 100 if a.endswith("%") else float(a)
                alpha = max(0.0, min(1.0, alpha))
                if alpha == 0:
                    return TRANSPARENT
                return ColorValue(*(_channel(p) for p in parts[:3]), a=alpha)
        except ValueError:
            return None
    return None


def color_distance(c1: ColorValue, c2: ColorValue) -> float:
    """Euclidean distance between two colors in RGB space."""
    return math.sqrt((c1.r - c2.r) ** 2 + (c1.g - c2.g) ** 2 + (c1.b - c2.b) ** 2)


# ----------------------------------------------------------------------------
# lengths

_LENGTH = re.compile(r"^([+-]?(?:\d+\.?\d*|\.\d+))(px|em|rem|pt|%)?$")
_FONT_KEYWORDS = {
    "xx-small": 9.0, "x-small": 10.0, "small": 13.0, "medium": 16.0,
    "large": 18.0, "x-large": 24.0, "xx-large": 32.0,
}
UNEVALUATED = "unevaluated-expression"


def _eval_const_arith(expr: str) -> Optional[float]:
    try:
        tree = ast.parse(expr.strip(), mode="eval")
    except SyntaxError:
        return None

    def ev(node: ast.AST) -> float:
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and type(node.value) in (int, float):
            return float(node.value)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Add, ast.Sub, ast.Mult, ast.Div)):
            a, b = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                return a * b
            return a / b
        raise ValueError("non-constant")

    try:
        return ev(tree)
    except (ValueError, ZeroDivisionError):
        return None


def parse_length(value: str, *, font: bool = False) -> Union[float, None, str]:
    """Convert a CSS length to px.

    Returns None for ``auto``/unsupported units and ``UNEVALUATED`` for an
    ``expression(...)`` that is not constant arithmetic.
    """
    v = value.strip().lower()
    if v.startswith("expression(") and v.endswith(")"):
        result = _eval_const_arith(v[len("expression("):-1])
        return UNEVALUATED if result is None else result
    if font and v in _FONT_KEYWORDS:
        return _FONT_KEYWORDS[v]
    m = _LENGTH.match(v)
    if not m:
        return None
    number, unit = float(m.group(1)), m.group(2)
    if unit in (None, "px"):
        return number
    if unit in ("em", "rem"):
        return number * 16.0
    if unit == "pt":
        return number * 4.0 / 3.0
    return number / 100.0 * 16.0 if font else None


# ----------------------------------------------------------------------------
# selectors and rules

_COMPOUND = re.compile(r"^(\*|[a-z][a-z0-9-]*)?((?:[.#][\w-]+|:hover)*)$", re.I)
_SIMPLE = re.compile(r"([.#])([\w-]+)|(:hover)", re.I)


@dataclass(frozen=True)
class Compound:
    tag: Optional[str]
    ids: tuple[str, ...] = ()
    classes: tuple[str, ...] = ()
    hover: bool = False


@dataclass(frozen=True)
class Selector:
    text: str
    compounds: Optional[tuple[Compound, ...]]  # None: outside the supported grammar
    combinators: tuple[str, ...] = ()

    @property
    def opaque(self) -> bool:
        return self.compounds is None

    @property
    def has_hover(self) -> bool:
        return bool(self.compounds) and any(c.hover for c in self.compounds)

    @property
    def specificity(self) -> tuple[int, int, int]:
        if not self.compounds:
            return (0, 0, 0)
        ids = sum(len(c.ids) for c in self.compounds)
        classes = sum(len(c.classes) + c.hover for c in self.compounds)
        tags = sum(1 for c in self.compounds if c.tag)
        return (ids, classes, tags)


def parse_selector(text: str) -> Selector:
    text = " ".join(text.split())
    spaced = re.sub(r"\s*>\s*", " > ", text)
    tokens = spaced.split(" ")
    compounds: list[Compound] = []
    combinators: list[str] = []
    expect_compound = True
    for tok in tokens:
        if tok == ">":
            if expect_compound or not compounds:
                return Selector(text, None)
            combinators.append(">")
            expect_compound = True
            continue
        m = _COMPOUND.match(tok)
        if not m or not tok:
            return Selector(text, None)
        if not expect_compound:
            combinators.append(" ")
        tag = m.group(1)
        ids, classes, hover = [], [], False
        for sm in _SIMPLE.finditer(m.group(2) or ""):
            if sm.group(3):
                hover = True
            elif sm.group(1) == "#":
                ids.append(sm.group(2))
            else:
                classes.append(sm.group(2))
        compounds.append(
            Compound(None if tag in (None, "*") else tag.lower(), tuple(ids), tuple(classes), hover)
        )
        expect_compound = False
    if not compounds or expect_compound:
        return Selector(text, None)
    return Selector(text, tuple(compounds), tuple(combinators))


def _compound_matches(c: Compound, node: ElementNode, hover: bool) -> bool:
    if c.hover and not hover:
        return False
    if c.tag and node.tag != c.tag:
        return False
    if c.ids and any(node.element_id != i for i in c.ids):
        return False
    if c.classes:
        have = node.classes
        if any(cls not in have for cls in c.classes):
            return False
    return True


def selector_matches(sel: Selector, node: ElementNode, hover: bool = False) -> bool:
    if sel.compounds is None:
        return False
    comps, combs = sel.compounds, sel.combinators

    def match_from(i: int, el: Optional[ElementNode]) -> bool:
        if el is None or el.tag == "#document" or not _compound_matches(comps[i], el, hover):
            return False
        if i == 0:
            return True
        if combs[i - 1] == ">":
            return match_from(i - 1, el.parent)
        anc = el.parent
        while anc is not None and anc.tag != "#document":
            if match_from(i - 1, anc):
                return True
            anc = anc.parent
        return False

    return match_from(len(comps) - 1, node)


@dataclass(frozen=True)
class Declaration:
    prop: str
    value: str
    important: bool = False


ORIGIN_RANK = {"default": 0, "hint": 1, "stylesheet": 2, "inline": 3}


@dataclass(frozen=True)
class StyleRule:
    selector: Selector
    declarations: tuple[Declaration, ...]
    origin: str = "stylesheet"
    source_order: int = 0


def _split_top(text: str, sep: str) -> list[str]:
    parts, depth, quote, buf = [], 0, "", []
    for ch in text:
        if quote:
            if ch == quote:
                quote = ""
        elif ch in "\"'":
            quote = ch
        elif ch == "(":
            depth += 1
        elif ch == ")":
            depth = max(0, depth - 1)
        elif ch == sep and depth == 0:
            parts.append("".join(buf))
            buf = []
            continue
        buf.append(ch)
    parts.append("".join(buf))
    return parts


def _expand_shorthand(prop: str, value: str, important: bool) -> list[Declaration]:
    if prop == "background":
        out = []
        image = re.search(r"url\s*\(", value, re.I)
        colors = [t for t in re.split(r"\s+(?![^(]*\))", value.strip()) if parse_color(t) is not None]
        if colors:
            out.append(Declaration("background-color", colors[-1], important))
        elif value.strip().lower() in ("none", "transparent"):
            out.append(Declaration("background-color", "transparent", important))
        out.append(Declaration("background-image", "url()" if image else "none", important))
        return out
    if prop == "margin":
        vals = value.split()
        left = {1: 0, 2: 1, 3: 1, 4: 3}.get(len(vals))
        return [Declaration("margin-left", vals[left], important)] if left is not None else []
    if prop == "font":
        for tok in value.replace("/", " / ").split():
            if parse_length(tok, font=True) not in (None, UNEVALUATED) and not tok.isdigit():
                return [Declaration("font-size", tok, important)]
        return []
    if prop == "text-decoration-line":
        return [Declaration("text-decoration", value, important)]
    return [Declaration(prop, value, important)]


def parse_declarations(text: str) -> tuple[Declaration, ...]:
    out: list[Declaration] = []
    for part in _split_top(text, ";"):
        if ":" not in part:
            continue
        prop, value = part.split(":", 1)
        prop = prop.strip().lower()
        value = value.strip()
        important = False
        m = re.search(r"!\s*important\s*$", value, re.I)
        if m:
            important = True
            value = value[: m.start()].strip()
        if not prop or not value or not re.fullmatch(r"-?[a-z][a-z-]*", prop):
            continue
        out.extend(_expand_shorthand(prop, value, important))
    return tuple(out)


def _strip_at_rules(text: str) -> str:
    """Drop @-rules (with or without a block); media queries are unsupported."""
    out, i, n = [], 0, len(text)
    while i < n:
        if text[i] == "@":
            j = i
            while j < n and text[j] not in "{;":
                j += 1
            if j < n and text[j] == "{":
                depth = 0
                while j < n:
                    if text[j] == "{":
                        depth += 1
                    elif text[j] == "}":
                        depth -= 1
                        if depth == 0:
                            break
                    j += 1
            i = j + 1
            continue
        out.append(text[i])
        i += 1
    return "".join(out)


def parse_stylesheet(text: str, origin: str = "stylesheet", base_order: int = 0) -> list[StyleRule]:
    """Parse rules in source order; malformed pieces are skipped."""
    text = re.sub(r"/\*.*?\*/", "", text, flags=re.S)
    text = text.replace("<!--", " ").replace("-->", " ")
    text = _strip_at_rules(text)
    rules: list[StyleRule] = []
    order = base_order
    for m in re.finditer(r"([^{}]*)\{([^{}]*)\}", text):
        selector_text, body = m.group(1).strip(), m.group(2)
        if not selector_text:
            continue
        decls = parse_declarations(body)
        for sel in selector_text.split(","):
            if not sel.strip():
                continue
            rules.append(StyleRule(parse_selector(sel), decls, origin, order))
            order += 1
    return rules


# ----------------------------------------------------------------------------
# computed style


@dataclass(frozen=True)
class ComputedStyle:
    color: ColorValue = BLACK
    background_color: Optional[ColorValue] = None  # None: transparent
    background_image_present: bool = False
    font_size: float = 16.0
    display: str = "inline"  # block | inline | none | other
    visibility: str = "visible"  # visible | hidden
    position: str = "static"
    left: Optional[float] = None
    top: Optional[float] = None
    text_indent: float = 0.0
    margin_left: float = 0.0
    width: Optional[float] = None
    height: Optional[float] = None
    z_index: Optional[int] = None
    overflow: str = "visible"  # visible | hidden | other
    text_decoration: frozenset[str] = frozenset()
    cursor: str = "auto"
    line_height: Optional[float] = None  # None: normal
    notes: tuple[str, ...] = field(default=(), compare=False)

    @property
    def used_line_height(self) -> float:
        return self.font_size * 1.2 if self.line_height is None else self.line_height

    @property
    def hidden(self) -> bool:
        return self.display == "none" or self.visibility == "hidden"


ROOT_STYLE = ComputedStyle(display="block")

BLOCK_TAGS = frozenset(
    "div p ul ol li marquee title html body head h1 h2 h3 h4 h5 h6 form table tbody thead "
    "tfoot tr td th nav header footer section article aside center blockquote pre dl dt dd "
    "address hr fieldset menu main figure caption".split()
)
INLINE_TAGS = frozenset("a span b i u em strong font small big label abbr code sub sup blink img".split())
NONE_TAGS = frozenset("script style meta link base template".split())

_DISPLAY = {
    "block": "block", "list-item": "block", "table": "block", "flex": "block", "grid": "block",
    "table-row": "block", "table-cell": "block", "inline": "inline", "none": "none",
}
_POSITIONS = {"static", "relative", "absolute", "fixed"}
INHERITED = ("color", "font_size", "visibility", "cursor", "line_height", "text_indent")


def default_declarations(node: ElementNode) -> list[Declaration]:
    if node.tag in BLOCK_TAGS:
        display = "block"
    elif node.tag in NONE_TAGS:
        display = "none"
    elif node.tag in INLINE_TAGS:
        display = "inline"
    else:
        display = "other" if node.tag in ("select", "input", "button", "textarea", "iframe") else "inline"
    decls = [Declaration("display", display)]
    if node.tag == "a" and "href" in node.attributes:
        decls += [
            Declaration("color", LINK_BLUE.hex()),
            Declaration("text-decoration", "underline"),
            Declaration("cursor", "pointer"),
        ]
    return decls


def presentational_hints(node: ElementNode) -> list[Declaration]:
    """Legacy HTML attributes that map onto CSS properties."""
    a = node.attributes
    out = []
    if "bgcolor" in a:
        out.append(Declaration("background-color", a["bgcolor"]))
    if "background" in a and node.tag in ("body", "table", "td", "th", "tr"):
        out.append(Declaration("background-image", "url()"))
    if node.tag == "font" and "color" in a:
        out.append(Declaration("color", a["color"]))
    if "text" in a and node.tag == "body":
        out.append(Declaration("color", a["text"]))
    if node.tag in ("img", "marquee", "table", "td", "th", "iframe", "div", "object", "embed"):
        for dim in ("width", "height"):
            if dim in a and re.fullmatch(r"\s*\d+(\.\d+)?\s*(px)?\s*", a[dim]):
                out.append(Declaration(dim, a[dim].strip()))
    if "hidden" in a:
        out.append(Declaration("display", "none"))
    return out


def inline_rule(node: ElementNode) -> Optional[StyleRule]:
    text = node.attributes.get("style")
    if not text:
        return None
    return StyleRule(Selector("[style]", ()), parse_declarations(text), "inline", 0)


def _apply(prop: str, value: str, parent: ComputedStyle, cur: dict, notes: list[str]) -> None:
    """Write the computed form of one winning declaration into ``cur``."""
    v = value.strip()
    lv = v.lower()
    if lv == "inherit":
        key = prop.replace("-", "_")
        if key == "background_color":
            return
        if hasattr(parent, key):
            cur[key] = getattr(parent, key)
        return
    if prop == "color":
        c = parse_color(v)
        if isinstance(c, ColorValue):
            cur["color"] = c
    elif prop == "background-color":
        c = parse_color(v)
        if c == TRANSPARENT:
            cur["background_color"] = None
        elif isinstance(c, ColorValue):
            cur["background_color"] = c
    elif prop == "background-image":
        cur["background_image_present"] = "url" in lv
    elif prop == "font-size":
        px = parse_length(v, font=True)
        if isinstance(px, float):
            cur["font_size"] = max(0.0, px)
    elif prop == "display":
        cur["display"] = _DISPLAY.get(lv, "other")
    elif prop == "visibility":
        cur["visibility"] = "hidden" if lv in ("hidden", "collapse") else "visible"
    elif prop == "position":
        if lv in _POSITIONS:
            cur["position"] = lv
    elif prop in ("left", "top", "width", "height", "text-indent", "margin-left"):
        px = parse_length(v)
        key = prop.replace("-", "_")
        if px == UNEVALUATED:
            notes.append(f"{UNEVALUATED}: {prop}:{v}")
            px = None
        if prop in ("text-indent", "margin-left"):
            cur[key] = px if isinstance(px, float) else 0.0
        elif prop in ("width", "height") and isinstance(px, float):
            cur[key] = max(0.0, px)
        else:
            cur[key] = px
    elif prop == "z-index":
        try:
            cur["z_index"] = int(lv)
        except ValueError:
            cur["z_index"] = None
    elif prop == "overflow":
        cur["overflow"] = {"visible": "visible", "hidden": "hidden", "clip": "hidden"}.get(lv, "other")
    elif prop == "text-decoration":
        flags = {f for f in lv.split() if f in ("underline", "overline", "line-through", "blink")}
        cur["text_decoration"] = frozenset(flags)
    elif prop == "cursor":
        cur["cursor"] = lv.split(",")[-1].strip() or "auto"
    elif prop == "line-height":
        if lv == "normal":
            cur["line_height"] = None
            return
        m = re.fullmatch(r"[+-]?(\d+\.?\d*|\.\d+)", lv)
        if m:
            cur["line_height"] = max(0.0, float(lv)) * cur.get("font_size", parent.font_size)
        else:
            px = parse_length(v, font=lv.endswith("%"))
            if isinstance(px, float):
                if lv.endswith("%"):
                    px = px / 16.0 * cur.get("font_size", parent.font_size)
                cur["line_height"] = max(0.0, px)


# font-size must be resolved before line-height multipliers
_PROP_ORDER = {"font-size": 0}


def cascade(node: ElementNode, rules: Iterable[StyleRule], hover: bool = False) -> dict[str, tuple[Declaration, Optional[StyleRule]]]:
    """Winning declaration (and its rule) per property for one element."""
    candidates: list[tuple[tuple, Declaration, Optional[StyleRule]]] = []
    for i, d in enumerate(default_declarations(node)):
        candidates.append(((0, 0, (0, 0, 0), -1, i), d, None))
    for i, d in enumerate(presentational_hints(node)):
        candidates.append(((0, 1, (0, 0, 0), -1, i), d, None))
    for rule in rules:
        if not selector_matches(rule.selector, node, hover):
            continue
        for i, d in enumerate(rule.declarations):
            key = (int(d.important), ORIGIN_RANK[rule.origin], rule.selector.specificity, rule.source_order, i)
            candidates.append((key, d, rule))
    inline = inline_rule(node)
    if inline is not None:
        for i, d in enumerate(inline.declarations):
            candidates.append(((int(d.important), 3, (0, 0, 0), 0, i), d, inline))
    winners: dict[str, tuple[tuple, Declaration, Optional[StyleRule]]] = {}
    for cand in candidates:
        prop = cand[1].prop
        if prop not in winners or cand[0] >= winners[prop][0]:
            winners[prop] = cand
    return {p: (w[1], w[2]) for p, w in winners.items()}


def computed_from(
    winners: Mapping[str, tuple[Declaration, Optional[StyleRule]]], parent: ComputedStyle
) -> ComputedStyle:
    cur: dict = {k: getattr(parent, k) for k in INHERITED}
    notes: list[str] = []
    for prop in sorted(winners, key=lambda p: (_PROP_ORDER.get(p, 1), p)):
        _apply(prop, winners[prop][0].value, parent, cur, notes)
    return replace(ComputedStyle(), **cur, notes=tuple(notes))


def compute_style(root: ElementNode, rules: Iterable[StyleRule], hover: bool = False) -> dict[int, ComputedStyle]:
    """Computed style for every element; inline ``style`` attributes are read from the tree.

    With ``hover=True`` every ``:hover`` compound is treated as active.
    """
    rules = sorted(rules, key=lambda r: r.source_order)
    active = [r for r in rules if not r.selector.opaque and (hover or not r.selector.has_hover)]
    styles: dict[int, ComputedStyle] = {root.node_id: ROOT_STYLE}
    stack = [(c, ROOT_STYLE) for c in reversed(root.children) if isinstance(c, ElementNode)]
    while stack:
        node, parent_style = stack.pop()
        style = computed_from(cascade(node, active, hover), parent_style)
        styles[node.node_id] = style
        stack.extend((c, style) for c in reversed(node.children) if isinstance(c, ElementNode))
    return styles


def effective_background(
    node: ElementNode, styles: Mapping[int, ComputedStyle]
) -> tuple[ColorValue, bool, Optional[int]]:
    """Background visible behind ``node``.

    Returns (color, image_in_chain, node_id that supplied the color or None
    for the white canvas default).
    """
    image = False
    el: Optional[ElementNode] = node
    while el is not None:
        st = styles.get(el.node_id)
        if st is not None:
            image = image or st.background_image_present
            if st.background_color is not None:
                return st.background_color, image, el.node_id
        el = el.parent
    return WHITE, image, None


def collect_stylesheets(
    root: ElementNode, sidecar: Optional[Mapping[str, str]] = None
) -> tuple[list[StyleRule], list[str]]:
    """Rules from ``<style>`` elements and local ``<link rel=stylesheet>`` files, in document order."""
    sidecar = sidecar or {}
    rules: list[StyleRule] = []
    notes: list[str] = []
    order = 0
    for node in root.iter():
        text = None
        if node.tag == "style":
            text = node.raw_text or ""
        elif node.tag == "link" and "stylesheet" in node.attributes.get("rel", "").lower().split():
            href = node.attributes.get("href", "").strip()
            if re.match(r"^([a-z][a-z0-9+.-]*:)?//", href, re.I):
                notes.append(f"remote stylesheet ignored: {href}")
            elif href in sidecar:
                text = sidecar[href]
            elif href.split("/")[-1] in sidecar:
                text = sidecar[href.split("/")[-1]]
            elif href:
                notes.append(f"stylesheet not found: {href}")
        if text is not None:
            parsed = parse_stylesheet(text, "stylesheet", order)
            order += len(parsed) + 1
            rules.extend(parsed)
    return rules, notes


@dataclass(frozen=True)
class HoverReveal:
    node_id: int
    revealed_by_selector: StyleRule


def hover_reveals(
    root: ElementNode,
    rules: Iterable[StyleRule],
    styles_normal: Mapping[int, ComputedStyle],
    styles_hover: Mapping[int, ComputedStyle],
) -> list[HoverReveal]:
    """Elements hidden normally but shown once ``:hover`` rules apply."""
    rules = list(rules)
    hover_rules = [r for r in rules if r.selector.has_hover]
    if not hover_rules:
        return []
    out = []
    for node in root.iter():
        n, h = styles_normal.get(node.node_id), styles_hover.get(node.node_id)
        if n is None or h is None or not n.hidden or h.hidden:
            continue
        winners = cascade(node, [r for r in rules if not r.selector.opaque], hover=True)
        for prop in ("display", "visibility"):
            w = winners.get(prop)
            if w and w[1] is not None and w[1].selector.has_hover:
                out.append(HoverReveal(node.node_id, w[1]))
                break
    return out
