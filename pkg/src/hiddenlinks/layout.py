"""Simplified box layout: enough geometry to tell tiny, off-screen and clipped boxes apart.

Model (deliberately rough):

* block boxes stack vertically and take the parent's content width unless a
  width is given; inline content wraps at spaces, inline elements move to
  the next line whole;
* absolute/fixed boxes sit at (left, top) in viewport coordinates, ``auto``
  counting as 0, and shrink to their content width;
* glyphs are 0.5em wide (1em for wide East Asian characters); ``normal``
  line height is 1.2em; an image with no size is 300x150;
* ``text-indent`` shifts the first line, ``margin-left`` shifts the box;
  floats, tables and other margins are ignored.

The viewport is ``W`` wide and unbounded downwards: content below the fold
is reachable by scrolling and so is not off-screen.
"""

from __future__ import annotations

import math
import unicodedata
from dataclasses import dataclass
from typing import Mapping, Optional, Union

from .dom import ElementNode, TextRun, normalize_space
from .style import ComputedStyle

DEFAULT_VIEWPORT = (1024, 768)
REPLACED_DEFAULT = (300.0, 150.0)


@dataclass(frozen=True)
class Rect:
    x: float
    y: float
    w: float
    h: float

    @property
    def area(self) -> float:
        return max(0.0, self.w) * max(0.0, self.h)

    def intersect(self, other: "Rect") -> "Rect":
        x0, y0 = max(self.x, other.x), max(self.y, other.y)
        x1 = min(self.x + self.w, other.x + other.w)
        y1 = min(self.y + self.h, other.y + other.h)
        return Rect(x0, y0, max(0.0, x1 - x0), max(0.0, y1 - y0))

    def contains(self, other: "Rect") -> bool:
        return (
            self.x <= other.x
            and self.y <= other.y
            and other.x + other.w <= self.x + self.w
            and other.y + other.h <= self.y + self.h
        )


@dataclass(frozen=True)
class BoxGeometry:
    x: float
    y: float
    w: float
    h: float
    clip: Optional[Rect]
    offscreen: bool
    clipped_fraction: float
    displayed: bool = True

    @property
    def rect(self) -> Rect:
        return Rect(self.x, self.y, self.w, self.h)


def text_width(text: str, font_size: float) -> float:
    total = 0.0
    for ch in text:
        total += 1.0 if unicodedata.east_asian_width(ch) in ("W", "F") else 0.5
    return total * font_size


def _is_offscreen(r: Rect, width: float) -> bool:
    if r.w <= 0 or r.h <= 0:
        return r.x < 0 or r.y < 0 or r.x > width
    return r.x + r.w <= 0 or r.y + r.h <= 0 or r.x >= width


def clipped_fraction(box: Rect, clip: Optional[Rect], viewport: Rect) -> float:
    if box.area == 0:
        return 1.0
    visible = box.intersect(viewport)
    if clip is not None:
        visible = visible.intersect(clip)
    return 1.0 - visible.area / box.area


class _Layout:
    def __init__(self, styles: Mapping[int, ComputedStyle], viewport: tuple[float, float]):
        self.styles = styles
        self.vw, self.vh = viewport
        self.rects: dict[int, Rect] = {}
        self.hidden_ids: set[int] = set()
        self._blocky: dict[int, bool] = {}
        self._inline_size: dict[int, tuple[float, float]] = {}

    # -- classification -------------------------------------------------
    def style(self, node: ElementNode) -> ComputedStyle:
        return self.styles[node.node_id]

    def out_of_flow(self, node: ElementNode) -> bool:
        return self.style(node).position in ("absolute", "fixed")

    def block_level(self, node: ElementNode) -> bool:
        cached = self._blocky.get(node.node_id)
        if cached is not None:
            return cached
        st = self.style(node)
        if st.display == "block":
            result = True
        elif st.display == "none":
            result = False
        else:
            result = any(
                isinstance(c, ElementNode) and not self.out_of_flow(c) and self.block_level(c)
                for c in node.children
            )
        self._blocky[node.node_id] = result
        return result

    def mark_hidden(self, node: ElementNode, x: float, y: float) -> None:
        for el in node.iter_all():
            self.hidden_ids.add(el.node_id)
            self.rects[el.node_id] = Rect(x, y, 0.0, 0.0)

    # -- block formatting -----------------------------------------------
    def block(self, node: ElementNode, x: float, y: float, avail_w: float, shrink: bool) -> tuple[float, float]:
        """Lay out a block-level box at (x, y); returns its (width, height)."""
        st = self.style(node)
        bx = x + st.margin_left
        if st.width is not None:
            w = st.width
        elif shrink:
            w = None
        else:
            w = max(0.0, avail_w - st.margin_left)
        content_w, content_h = self.flow(node, bx, y, w if w is not None else self.vw, st, shrink or w is None)
        if w is None:
            w = content_w
        h = st.height if st.height is not None else content_h
        self.rects[node.node_id] = Rect(bx, y, w, h)
        return w + st.margin_left, h

    def positioned(self, node: ElementNode) -> None:
        st = self.style(node)
        x = st.left if st.left is not None else 0.0
        y = st.top if st.top is not None else 0.0
        if self.block_level(node) or st.width is not None or st.height is not None:
            self.block(node, x, y, self.vw, shrink=st.width is None)
        else:
            self.inline(node, x, y)

    def flow(
        self, node: ElementNode, x: float, y: float, width: float, st: ComputedStyle, shrink: bool
    ) -> tuple[float, float]:
        """Stack children of ``node``; returns (max content width, content height).

        Inline content wraps at word boundaries when it would cross the right
        edge; an inline element is never split, it moves to the next line whole.
        """
        cy = y
        max_w = 0.0
        right = x + width
        cur_x = x + st.text_indent
        line_h = 0.0
        line_used = False
        space = text_width(" ", st.font_size)

        def newline() -> None:
            nonlocal cy, cur_x, line_h, line_used, max_w
            if line_used:
                max_w = max(max_w, cur_x - x)
                cy += line_h
            cur_x, line_h, line_used = x, 0.0, False

        for child in node.children:
            if isinstance(child, TextRun):
                text = normalize_space(child.text)
                if not text:
                    continue
                sx, sy = cur_x, cy
                for i, word in enumerate(text.split(" ")):
                    ww = text_width(word, st.font_size) + (space if i or line_used else 0.0)
                    if line_used and cur_x + ww > right:
                        newline()
                        ww = text_width(word, st.font_size)
                    cur_x += ww
                    line_h = max(line_h, st.used_line_height)
                    line_used = True
                if cy == sy:
                    self.rects[child.node_id] = Rect(sx, sy, cur_x - sx, st.used_line_height)
                else:
                    self.rects[child.node_id] = Rect(x, sy, width, cy - sy + st.used_line_height)
                continue
            cst = self.style(child)
            if cst.display == "none":
                self.mark_hidden(child, cur_x, cy)
                continue
            if child.tag == "br":
                if not line_used:
                    line_h, line_used = st.used_line_height, True
                newline()
                continue
            if self.out_of_flow(child):
                self.positioned(child)
                continue
            dx = (cst.left or 0.0) if cst.position == "relative" else 0.0
            dy = (cst.top or 0.0) if cst.position == "relative" else 0.0
            if self.block_level(child):
                newline()
                w, h = self.block(child, x + dx, cy + dy, width, shrink)
                max_w = max(max_w, w)
                cy += h
                cur_x = x
                continue
            w, h = self._measure_inline(child)
            if line_used and cur_x + w > right:
                newline()
            w, h = self.inline(child, cur_x + dx, cy + dy)
            cur_x += w
            line_h = max(line_h, h)
            line_used = True
        newline()
        return max_w, cy - y

    def _measure_inline(self, node: ElementNode) -> tuple[float, float]:
        """Size of an inline box; sizes do not depend on position, so they are memoised.

        The probe writes provisional rects that the real placement overwrites.
        """
        size = self._inline_size.get(node.node_id)
        if size is None:
            size = self.inline(node, 0.0, 0.0)
        return size

    # -- inline formatting ----------------------------------------------
    def inline(self, node: ElementNode, x: float, y: float) -> tuple[float, float]:
        st = self.style(node)
        if node.tag in ("img", "input", "iframe", "object", "embed", "select", "button", "textarea"):
            w = st.width if st.width is not None else REPLACED_DEFAULT[0]
            h = st.height if st.height is not None else REPLACED_DEFAULT[1]
            if node.tag in ("select", "input", "button"):
                h = st.height if st.height is not None else st.used_line_height
                w = st.width if st.width is not None else text_width(node.text_content() or " " * 20, st.font_size)
            self.rects[node.node_id] = Rect(x, y, w, h)
            self._descendants_at(node, x, y, w, h)
            self._inline_size[node.node_id] = (w, h)
            return w, h
        cx = x
        h = 0.0
        for child in node.children:
            if isinstance(child, TextRun):
                text = normalize_space(child.text)
                if not text:
                    continue
                tw = text_width(text, st.font_size)
                self.rects[child.node_id] = Rect(cx, y, tw, st.used_line_height)
                cx += tw
                h = max(h, st.used_line_height)
                continue
            cst = self.style(child)
            if cst.display == "none":
                self.mark_hidden(child, cx, y)
                continue
            if self.out_of_flow(child):
                self.positioned(child)
                continue
            if self.block_level(child):
                w, ch = self.block(child, cx, y, self.vw, shrink=True)
            else:
                w, ch = self.inline(child, cx, y)
            cx += w
            h = max(h, ch)
        w = cx - x
        if st.width is not None and st.display == "other":
            w = st.width
        if st.height is not None and st.display == "other":
            h = st.height
        self.rects[node.node_id] = Rect(x, y, w, h)
        self._inline_size[node.node_id] = (w, h)
        return w, h

    def _descendants_at(self, node: ElementNode, x: float, y: float, w: float, h: float) -> None:
        for el in node.iter_all():
            if el is not node:
                self.rects.setdefault(el.node_id, Rect(x, y, w, h))


def layout_boxes(
    root: ElementNode,
    styles: Mapping[int, ComputedStyle],
    viewport: tuple[float, float] = DEFAULT_VIEWPORT,
) -> dict[int, BoxGeometry]:
    """Geometry for every element and text run under ``root``."""
    lay = _Layout(styles, viewport)
    lay.block(root, 0.0, 0.0, float(viewport[0]), shrink=False)
    view = Rect(0.0, 0.0, float(viewport[0]), math.inf)

    out: dict[int, BoxGeometry] = {}
    stack: list[tuple[Union[ElementNode, TextRun], Optional[Rect]]] = [(root, None)]
    while stack:
        node, clip = stack.pop()
        r = lay.rects.get(node.node_id, Rect(0.0, 0.0, 0.0, 0.0))
        displayed = node.node_id not in lay.hidden_ids
        out[node.node_id] = BoxGeometry(
            r.x, r.y, r.w, r.h, clip, _is_offscreen(r, viewport[0]), clipped_fraction(r, clip, view), displayed
        )
        if isinstance(node, ElementNode):
            child_clip = clip
            st = styles.get(node.node_id)
            if st is not None and st.overflow == "hidden" and displayed:
                child_clip = r if clip is None else clip.intersect(r)
            stack.extend((c, child_clip) for c in reversed(node.children))
    return out
