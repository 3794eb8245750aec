"""Per-link hidden-link rules A-L and the full page pipeline.

Labels:

    A  colour equal to the background        G  display:none / visibility:hidden
    B  colour close to the background        H  hidden by a script
    C  tiny font or tiny box                 I  page redirects or cloaks
    D  disguised as plain text               J  buried in a pull-down / hover menu
    E  fast marquee or tiny blink            K  URL in long title or meta tags
    F  positioned off screen                 L  clipped or stacked under another layer

Labels are independent; one link may carry several.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Union

from .dom import ElementNode, Hyperlink, extract_links, normalize_space, parse_document
from .layout import BoxGeometry, layout_boxes
from .scripts import ScriptAnalysis, analyze_scripts
from .style import (
    ComputedStyle,
    HoverReveal,
    collect_stylesheets,
    color_distance,
    compute_style,
    effective_background,
    hover_reveals,
)

TECHNIQUES = tuple("ABCDEFGHIJKL")


@dataclass(frozen=True)
class Config:
    tau_color: float = 32.0
    tau_tiny_font: float = 1.0
    tau_tiny_px: float = 2.0
    tau_scroll: float = 50.0
    tau_menu: int = 20
    tau_title: int = 80
    clip_cutoff: float = 0.99
    viewport_width: int = 1024
    viewport_height: int = 768
    step_budget: int = 10_000
    workers: int = 1

    @property
    def viewport(self) -> tuple[int, int]:
        return (self.viewport_width, self.viewport_height)

    def replace(self, **changes) -> "Config":
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})

    @classmethod
    def from_pairs(cls, pairs: Mapping[str, str]) -> "Config":
        """Build from string values; unknown keys raise ``KeyError``."""
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        values = {}
        for key, raw in pairs.items():
            name = key.strip().replace("-", "_")
            if name not in types:
                raise KeyError(f"unknown config key: {key}")
            values[name] = (float if types[name] in ("float", float) else int)(raw.strip())
        return cls(**values)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Config":
        """Read ``key = value`` lines; ``#`` starts a comment."""
        pairs = {}
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            k, v = line.split("=", 1)
            pairs[k.strip()] = v
        return cls.from_pairs(pairs)


@dataclass(frozen=True)
class Finding:
    link: Hyperlink
    technique: str
    evidence: tuple[str, ...]
    confidence: str  # high | low


@dataclass
class PageResult:
    url_or_path: str
    findings: list[Finding] = field(default_factory=list)
    link_total: int = 0
    techniques_present: frozenset = frozenset()
    notes: list[str] = field(default_factory=list)
    error: Optional[str] = None


# ----------------------------------------------------------------------------
# page context shared by the rules

@dataclass
class PageContext:
    root: ElementNode
    nodes: dict[int, ElementNode]
    styles: dict[int, ComputedStyle]
    geometry: dict[int, BoxGeometry]
    reveals: dict[int, HoverReveal]
    scripts: ScriptAnalysis
    config: Config

    def chain(self, node: ElementNode) -> list[ElementNode]:
        """``node`` followed by its ancestors, root last."""
        return [node, *node.ancestors()]


def build_context(
    root: ElementNode, sidecar: Optional[Mapping[str, str]], config: Config, base_url: Optional[str] = None
) -> tuple[PageContext, list[str]]:
    rules, notes = collect_stylesheets(root, sidecar)
    styles = compute_style(root, rules)
    hover_styles = compute_style(root, rules, hover=True)
    geometry = layout_boxes(root, styles, config.viewport)
    reveals = {r.node_id: r for r in hover_reveals(root, rules, styles, hover_styles)}
    analysis = analyze_scripts(root, base_url, config.step_budget)
    for st_id, st in styles.items():
        notes.extend(f"{n} (node {st_id})" for n in st.notes)
    notes.extend(analysis.notes)
    nodes = {n.node_id: n for n in root.iter()}
    return PageContext(root, nodes, styles, geometry, reveals, analysis, config), notes


# ----------------------------------------------------------------------------
# A / B

def detect_color_hiding(link: Hyperlink, ctx: PageContext) -> list[Finding]:
    node = ctx.nodes[link.anchor_node]
    st = ctx.styles[node.node_id]
    bg, image, supplier = effective_background(node, ctx.styles)
    dist = color_distance(st.color, bg)
    src = f"node {supplier}" if supplier is not None else "canvas default"
    conf = "low" if image else "high"
    extra = ("background image present in ancestor chain",) if image else ()
    if dist == 0:
        return [Finding(link, "A", (f"node {node.node_id} color {st.color.hex()} equals background ({src})", *extra), conf)]
    if dist <= ctx.config.tau_color:
        return [Finding(link, "B", (
            f"node {node.node_id} color {st.color.hex()} vs background {bg.hex()} ({src}): distance {dist:.3f}", *extra), conf)]
    return []


# ----------------------------------------------------------------------------
# C / F / L

def _scrollamount(node: ElementNode) -> Optional[float]:
    m = re.match(r"\s*(\d+(?:\.\d+)?)", node.get("scrollamount") or "")
    return float(m.group(1)) if m else None


def _fast_marquee(node: ElementNode, config: Config) -> bool:
    if node.tag != "marquee":
        return False
    amount = _scrollamount(node)
    return amount is not None and amount >= config.tau_scroll


def _hiding_sources(node: ElementNode, ctx: PageContext) -> list[ElementNode]:
    """Elements whose own style hides ``node`` (display:none, or where visibility turns hidden)."""
    out = []
    for el in ctx.chain(node):
        st = ctx.styles.get(el.node_id)
        if st is None:
            continue
        if st.display == "none":
            out.append(el)
    st = ctx.styles[node.node_id]
    if st.visibility == "hidden":
        el = node
        while el.parent is not None and ctx.styles[el.parent.node_id].visibility == "hidden":
            el = el.parent
        out.append(el)
    return out


def detect_geometric_hiding(link: Hyperlink, ctx: PageContext) -> list[Finding]:
    cfg = ctx.config
    node = ctx.nodes[link.anchor_node]
    st = ctx.styles[node.node_id]
    geo = ctx.geometry[node.node_id]
    out: list[Finding] = []
    if not geo.displayed:
        return out

    # C
    tiny: list[str] = []
    conf = "low"
    if st.font_size <= cfg.tau_tiny_font:
        tiny.append(f"node {node.node_id} font-size {st.font_size:g}px")
        conf = "high"
    if geo.w <= cfg.tau_tiny_px or geo.h <= cfg.tau_tiny_px:
        tiny.append(f"node {node.node_id} box {geo.w:g}x{geo.h:g}")
    for anc in node.ancestors():
        if _fast_marquee(anc, cfg):
            continue  # a fast marquee is labelled by its speed
        ast_ = ctx.styles.get(anc.node_id)
        if ast_ is None:
            continue
        for dim in ("width", "height"):
            v = getattr(ast_, dim)
            if v is not None and v <= cfg.tau_tiny_px:
                tiny.append(f"ancestor node {anc.node_id} ({anc.tag}) {dim} {v:g}px")
                conf = "high"
    if tiny:
        out.append(Finding(link, "C", tuple(dict.fromkeys(tiny)), conf))

    # F
    if geo.offscreen:
        far = geo.x + geo.w + cfg.viewport_width <= 0 or geo.y + geo.h + cfg.viewport_height <= 0
        out.append(Finding(link, "F", (
            f"node {node.node_id} box at ({geo.x:g},{geo.y:g}) size {geo.w:g}x{geo.h:g} outside viewport",),
            "high" if far else "low"))

    # L, clipping
    if geo.clip is not None and geo.rect.area > 0 and not geo.offscreen:
        visible = geo.rect.intersect(geo.clip).area / geo.rect.area
        if 1.0 - visible >= cfg.clip_cutoff:
            out.append(Finding(link, "L", (
                f"node {node.node_id} clipped by overflow:hidden ancestor; clip "
                f"({geo.clip.x:g},{geo.clip.y:g},{geo.clip.w:g},{geo.clip.h:g}), visible fraction {visible:.3f}",),
                "low"))
            return out

    # L, stacking
    cover = _covering_layer(node, geo, ctx)
    if cover is not None:
        out.append(Finding(link, "L", (cover,), "low"))
    return out


def _stack_z(node: ElementNode, ctx: PageContext) -> int:
    for el in ctx.chain(node):
        st = ctx.styles.get(el.node_id)
        if st is not None and st.position != "static" and st.z_index is not None:
            return st.z_index
    return 0


def _covering_layer(node: ElementNode, geo: BoxGeometry, ctx: PageContext) -> Optional[str]:
    if geo.rect.area <= 0:
        return None
    z = _stack_z(node, ctx)
    own = {node.node_id, *(a.node_id for a in node.ancestors())}
    inside = {e.node_id for e in node.iter()}
    for el in ctx.root.iter():
        if el.node_id in own or el.node_id in inside:
            continue
        st = ctx.styles.get(el.node_id)
        g = ctx.geometry.get(el.node_id)
        if st is None or g is None or not g.displayed or st.visibility == "hidden":
            continue
        opaque = el.tag == "img" or st.background_color is not None or st.background_image_present
        if not opaque or g.rect.area <= 0 or not g.rect.contains(geo.rect):
            continue
        cz = _stack_z(el, ctx)
        if cz > z:
            return (f"node {node.node_id} (z-index {z}) lies under node {el.node_id} "
                    f"({el.tag}, z-index {cz}) covering ({g.x:g},{g.y:g},{g.w:g},{g.h:g})")
    return None


# ----------------------------------------------------------------------------
# G / E

def detect_style_hiding(link: Hyperlink, ctx: PageContext) -> list[Finding]:
    cfg = ctx.config
    node = ctx.nodes[link.anchor_node]
    out: list[Finding] = []
    sources = [s for s in _hiding_sources(node, ctx) if s.node_id not in ctx.reveals]
    if sources:
        ev = []
        for s in sources:
            st = ctx.styles[s.node_id]
            what = "display:none" if st.display == "none" else "visibility:hidden"
            ev.append(f"node {s.node_id} ({s.tag}) {what}")
        out.append(Finding(link, "G", tuple(dict.fromkeys(ev)), "high"))

    for anc in ctx.chain(node):
        if _fast_marquee(anc, cfg):
            out.append(Finding(link, "E", (
                f"marquee node {anc.node_id} scrollamount {_scrollamount(anc):g} >= {cfg.tau_scroll:g}",), "high"))
            break
        st = ctx.styles.get(anc.node_id)
        if anc.tag == "blink" or (st is not None and "blink" in st.text_decoration):
            g = ctx.geometry[anc.node_id]
            tiny_font = st is not None and st.font_size <= cfg.tau_tiny_font
            if tiny_font or g.w <= cfg.tau_tiny_px or g.h <= cfg.tau_tiny_px:
                out.append(Finding(link, "E", (f"blinking node {anc.node_id} with tiny box {g.w:g}x{g.h:g}",), "high"))
                break
    return out


# ----------------------------------------------------------------------------
# D

def detect_text_disguise(link: Hyperlink, ctx: PageContext) -> Optional[Finding]:
    node = ctx.nodes[link.anchor_node]
    st = ctx.styles[node.node_id]
    parent = node.parent
    if parent is None:
        return None
    pst = ctx.styles[parent.node_id]
    dist = color_distance(st.color, pst.color)
    if dist > ctx.config.tau_color:
        return None
    signals = []
    if "underline" not in st.text_decoration and "underline" not in pst.text_decoration:
        signals.append(f"node {node.node_id} not underlined, like surrounding text of node {parent.node_id}")
    if st.cursor == "text":
        signals.append(f"node {node.node_id} cursor:text")
    if node.node_id in ctx.scripts.status_handlers:
        signals.append(f"node {node.node_id} onmouseover suppresses status: {ctx.scripts.status_handlers[node.node_id]}")
    if len(signals) < 2:
        return None
    signals.append(f"node {node.node_id} color {st.color.hex()} within {dist:.3f} of text color")
    return Finding(link, "D", tuple(signals), "high" if len(signals) == 4 else "low")


# ----------------------------------------------------------------------------
# H / I

def detect_script_hiding(link: Hyperlink, ctx: PageContext) -> list[Finding]:
    node = ctx.nodes[link.anchor_node]
    out: list[Finding] = []
    ev = []
    for eff in ctx.scripts.hide_effects:
        if eff.covers(node):
            flags = ",".join(sorted(eff.obfuscation)) or "plain"
            ev.append(f"script node {eff.source_node}: {eff.evidence} [{eff.property}; {flags}]")
    if ev:
        out.append(Finding(link, "H", tuple(ev), "high"))
    redirects = ctx.scripts.redirections
    if redirects:
        targets = {r.target for r in redirects}
        if link.href_resolved not in targets and link.href_raw not in targets:
            out.append(Finding(link, "I", tuple(f"{r.kind}: {r.evidence}" for r in redirects), "high"))
    return out


# ----------------------------------------------------------------------------
# J

_LIST_TAGS = frozenset({"ul", "ol", "menu", "dl", "select", "div", "nav", "td", "span"})


def detect_menu_burial(link: Hyperlink, ctx: PageContext, anchors_under: Mapping[int, int]) -> Optional[Finding]:
    cfg = ctx.config
    node = ctx.nodes[link.anchor_node]
    for anc in node.ancestors():
        if anc.node_id in ctx.reveals:
            sel = ctx.reveals[anc.node_id].revealed_by_selector.selector.text
            return Finding(link, "J", (f"node {anc.node_id} ({anc.tag}) hidden until hover via '{sel}'",), "high")
    for container in node.ancestors():
        if container.tag not in _LIST_TAGS:
            continue
        count = anchors_under.get(container.node_id, 0)
        if count < cfg.tau_menu:
            continue
        for el in ctx.chain(container):
            st = ctx.styles.get(el.node_id)
            if st is None:
                continue
            if st.hidden:
                return Finding(link, "J", (
                    f"list node {container.node_id} with {count} links inside hidden node {el.node_id}",), "low")
            g = ctx.geometry[el.node_id]
            cg = ctx.geometry[container.node_id]
            if st.overflow == "hidden" and st.height is not None and _content_height(container, ctx) > st.height:
                return Finding(link, "J", (
                    f"list node {container.node_id} with {count} links collapsed in node {el.node_id} "
                    f"(height {g.h:g}px, content {cg.h:g}px)",), "low")
        break
    return None


def _content_height(node: ElementNode, ctx: PageContext) -> float:
    top = ctx.geometry[node.node_id].y
    bottom = top
    for el in node.iter_all():
        g = ctx.geometry.get(el.node_id)
        if g is not None and g.displayed:
            bottom = max(bottom, g.y + g.h)
    return bottom - top


def _anchor_counts(root: ElementNode) -> dict[int, int]:
    counts: dict[int, int] = {}
    for el in root.iter():
        if el.tag == "a" and "href" in el.attributes:
            for anc in el.ancestors():
                counts[anc.node_id] = counts.get(anc.node_id, 0) + 1
        elif el.tag == "option":
            for anc in el.ancestors():
                if anc.tag == "select":
                    counts[anc.node_id] = counts.get(anc.node_id, 0) + 1
    return counts


# ----------------------------------------------------------------------------
# K

_TLDS = "com|net|org|info|biz|cn|us|uk|de|ru|jp|tw|hk|cc|tv|me|io|co|edu|gov|mobi|name|ws|in|fr|it|nl|au|ca|kr|eu|xyz|top|site|online"
URL_TOKEN = re.compile(
    r"(?<![\w@.-])(?:"
    r"[a-z][a-z0-9+.-]*://[^\s\"'<>,;|]+"
    r"|www\.[a-z0-9-]+(?:\.[a-z0-9-]+)+(?:/[^\s\"'<>,;|]*)?"
    r"|(?:[a-z0-9](?:[a-z0-9-]*[a-z0-9])?\.)+(?:" + _TLDS + r")(?![\w-])(?:/[^\s\"'<>,;|]*)?"
    r")",
    re.I,
)


def url_tokens(text: str) -> list[tuple[int, int, str]]:
    """(start, end, token) for every URL-shaped token in ``text``."""
    return [(m.start(), m.end(), m.group(0).rstrip(".")) for m in URL_TOKEN.finditer(text)]


def detect_metadata_links(root: ElementNode, config: Config = Config()) -> list[Finding]:
    out: list[Finding] = []
    seen: set[tuple[int, str]] = set()

    def add(node: ElementNode, token: str, evidence: str) -> None:
        if (node.node_id, token) in seen:
            return
        seen.add((node.node_id, token))
        link = Hyperlink(token, token, token, node.node_id, None, False, True)
        out.append(Finding(link, "K", (evidence,), "high"))

    for node in root.iter():
        if node.tag == "title":
            text = normalize_space(node.text_content())
            for start, end, token in url_tokens(text):
                if end > config.tau_title:
                    add(node, token, f"title node {node.node_id}: '{token}' at offset {start} past {config.tau_title} chars")
        elif node.tag == "meta" and (node.get("name") or "").strip().lower() in ("keywords", "description"):
            content = node.get("content") or ""
            for start, _end, token in url_tokens(content):
                add(node, token, f"meta {node.get('name', '').lower()} node {node.node_id}: '{token}' at offset {start}")
    return out


# ----------------------------------------------------------------------------
# pipeline

def _sort_key(f: Finding) -> tuple:
    return (f.link.anchor_node, f.technique, f.link.href_resolved, f.evidence)


def classify_tree(
    root: ElementNode,
    sidecar: Optional[Mapping[str, str]] = None,
    config: Config = Config(),
    url_or_path: str = "",
    base_url: Optional[str] = None,
) -> PageResult:
    ctx, notes = build_context(root, sidecar, config, base_url)
    links = extract_links(root, base_url)
    counts = _anchor_counts(root)
    findings: list[Finding] = []
    for link in links:
        findings += detect_color_hiding(link, ctx)
        findings += detect_geometric_hiding(link, ctx)
        findings += detect_style_hiding(link, ctx)
        d = detect_text_disguise(link, ctx)
        if d is not None:
            findings.append(d)
        findings += detect_script_hiding(link, ctx)
        j = detect_menu_burial(link, ctx, counts)
        if j is not None:
            findings.append(j)
    k_findings = detect_metadata_links(root, config)
    findings += k_findings
    findings.sort(key=_sort_key)
    return PageResult(
        url_or_path=url_or_path,
        findings=findings,
        link_total=len(links) + len(k_findings),
        techniques_present=frozenset(f.technique for f in findings),
        notes=list(dict.fromkeys(notes)),
    )


def classify_page(
    data: Union[bytes, str],
    sidecar: Optional[Mapping[str, str]] = None,
    config: Config = Config(),
    url_or_path: str = "",
    base_url: Optional[str] = None,
    encoding_hint: Optional[str] = None,
) -> PageResult:
    """Parse, style, lay out and analyse one page, then apply every rule."""
    try:
        root = parse_document(data, encoding_hint)
        return classify_tree(root, sidecar, config, url_or_path, base_url)
    except RecursionError as exc:
        return PageResult(url_or_path, error=f"recursion limit: {exc}")


def compare_snapshots(
    doc_spider: Union[bytes, str], doc_browser: Union[bytes, str], base_url: Optional[str] = None
) -> list[Finding]:
    """I findings for links the spider copy has and the browser copy lacks (multiset difference)."""
    spider = extract_links(parse_document(doc_spider), base_url)
    browser = extract_links(parse_document(doc_browser), base_url)
    remaining: dict[str, int] = {}
    for link in browser:
        remaining[link.href_resolved] = remaining.get(link.href_resolved, 0) + 1
    out = []
    for link in spider:
        if remaining.get(link.href_resolved, 0) > 0:
            remaining[link.href_resolved] -= 1
            continue
        out.append(Finding(link, "I", (f"cloaking-diff: node {link.anchor_node} absent from browser snapshot",), "high"))
    return out


def techniques_of(findings: Iterable[Finding], anchor_node: int) -> set[str]:
    return {f.technique for f in findings if f.link.anchor_node == anchor_node}
