"""HTML parsing into a small element tree, plus hyperlink extraction.

Tokenizing is delegated to :class:`html.parser.HTMLParser`; tree construction
and error recovery happen here.  Recovery rules:

* unclosed elements close at their parent's end tag or at end of input,
* end tags with no matching open element are dropped,
* attribute values may be single-, double- or un-quoted (the tokenizer
  already accepts all three).

``script`` and ``style`` bodies are kept verbatim in ``ElementNode.raw_text``
and never become text runs.
"""

from __future__ import annotations

import codecs
import re
from dataclasses import dataclass, field
from html.parser import HTMLParser
from typing import Iterator, Optional, Union
from urllib.parse import urljoin, urlsplit

VOID_ELEMENTS = frozenset(
    "area base br col embed hr img input keygen link meta param source track wbr".split()
)
RAW_TEXT_ELEMENTS = frozenset({"script", "style"})

# start tag -> open elements it implicitly closes (searched up to a boundary)
_IMPLIED_END = {
    "li": ({"li"}, {"ul", "ol", "menu"}),
    "option": ({"option"}, {"select", "datalist", "optgroup"}),
    "dt": ({"dt", "dd"}, {"dl"}),
    "dd": ({"dt", "dd"}, {"dl"}),
    "tr": ({"tr", "td", "th"}, {"table", "tbody", "thead", "tfoot"}),
    "td": ({"td", "th"}, {"tr", "table"}),
    "th": ({"td", "th"}, {"tr", "table"}),
    "a": ({"a"}, set()),
}
_CLOSES_P = frozenset(
    "address article aside blockquote div dl fieldset footer form h1 h2 h3 h4 h5 h6 "
    "header hr menu nav ol p pre section table ul".split()
)

_ASCII_WS = re.compile(r"[ \t\n\r\f]+")
_META_CHARSET = re.compile(rb"""<meta[^>]+charset\s*=\s*["']?\s*([A-Za-z0-9_:.\-]+)""", re.I)
_ENCODING_ALIASES = {"gb2312": "gb18030", "gbk": "gb18030", "x-gbk": "gb18030"}


@dataclass(eq=False)
class TextRun:
    text: str
    node_id: int
    parent: Optional["ElementNode"] = field(default=None, repr=False)


@dataclass(eq=False)
class ElementNode:
    tag: str
    attributes: dict[str, str]
    node_id: int
    children: list[Union["ElementNode", TextRun]] = field(default_factory=list, repr=False)
    parent: Optional["ElementNode"] = field(default=None, repr=False)
    raw_text: Optional[str] = field(default=None, repr=False)

    def get(self, name: str, default: Optional[str] = None) -> Optional[str]:
        return self.attributes.get(name, default)

    @property
    def element_id(self) -> Optional[str]:
        return self.attributes.get("id")

    @property
    def classes(self) -> tuple[str, ...]:
        return tuple(self.attributes.get("class", "").split())

    def iter(self) -> Iterator["ElementNode"]:
        """Pre-order walk over this element and its element descendants."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(c for c in reversed(node.children) if isinstance(c, ElementNode))

    def iter_all(self) -> Iterator[Union["ElementNode", TextRun]]:
        stack: list[Union[ElementNode, TextRun]] = [self]
        while stack:
            node = stack.pop()
            yield node
            if isinstance(node, ElementNode):
                stack.extend(reversed(node.children))

    def ancestors(self) -> Iterator["ElementNode"]:
        node = self.parent
        while node is not None:
            yield node
            node = node.parent

    def text_content(self) -> str:
        return "".join(n.text for n in self.iter_all() if isinstance(n, TextRun))

    def last_descendant_id(self) -> int:
        node: Union[ElementNode, TextRun] = self
        while isinstance(node, ElementNode) and node.children:
            node = node.children[-1]
        return node.node_id


@dataclass(frozen=True)
class Hyperlink:
    href_raw: str
    href_resolved: str
    anchor_text: str
    anchor_node: int
    title_attr: Optional[str] = None
    unresolved: bool = False
    synthetic: bool = False


def normalize_space(text: str) -> str:
    # only ASCII whitespace collapses; U+00A0 must survive
    return _ASCII_WS.sub(" ", text).strip(" ")


def sniff_encoding(data: bytes) -> str:
    if data.startswith(codecs.BOM_UTF8):
        return "utf-8-sig"
    if data.startswith((codecs.BOM_UTF16_LE, codecs.BOM_UTF16_BE)):
        return "utf-16"
    m = _META_CHARSET.search(data[:1024])
    if m:
        name = m.group(1).decode("ascii").lower()
        name = _ENCODING_ALIASES.get(name, name)
        try:
            return codecs.lookup(name).name
        except LookupError:
            pass
    return "utf-8"


def decode_bytes(data: bytes, encoding_hint: Optional[str] = None) -> str:
    encoding = encoding_hint or sniff_encoding(data)
    try:
        return data.decode(encoding, errors="replace")
    except LookupError:
        return data.decode("utf-8", errors="replace")


class _TreeBuilder(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.next_id = 0
        self.root = self._element("#document", {})
        self.stack = [self.root]
        self.pending_text: list[str] = []

    def _element(self, tag: str, attrs: dict[str, str]) -> ElementNode:
        node = ElementNode(tag=tag, attributes=attrs, node_id=self.next_id)
        self.next_id += 1
        return node

    def _flush_text(self) -> None:
        if not self.pending_text:
            return
        text = "".join(self.pending_text)
        self.pending_text = []
        top = self.stack[-1]
        if top.tag in RAW_TEXT_ELEMENTS:
            top.raw_text = (top.raw_text or "") + text
            return
        run = TextRun(text=text, node_id=self.next_id, parent=top)
        self.next_id += 1
        top.children.append(run)

    def _close_to(self, index: int) -> None:
        del self.stack[index:]

    def _apply_implied_ends(self, tag: str) -> None:
        if tag in _CLOSES_P:
            for i in range(len(self.stack) - 1, 0, -1):
                t = self.stack[i].tag
                if t == "p":
                    self._close_to(i)
                    break
                if t not in ("b", "i", "span", "font", "em", "strong", "u", "a"):
                    break
        rule = _IMPLIED_END.get(tag)
        if rule is None:
            return
        closes, boundary = rule
        for i in range(len(self.stack) - 1, 0, -1):
            t = self.stack[i].tag
            if t in closes:
                self._close_to(i)
                return
            if t in boundary:
                return

    def handle_starttag(self, tag: str, attrs: list[tuple[str, Optional[str]]]) -> None:
        self._flush_text()
        self._apply_implied_ends(tag)
        attributes: dict[str, str] = {}
        for name, value in attrs:
            attributes.setdefault(name.lower(), "" if value is None else value)
        node = self._element(tag.lower(), attributes)
        parent = self.stack[-1]
        node.parent = parent
        parent.children.append(node)
        if node.tag in RAW_TEXT_ELEMENTS:
            node.raw_text = ""
        if node.tag not in VOID_ELEMENTS:
            self.stack.append(node)

    def handle_startendtag(self, tag: str, attrs: list[tuple[str, Optional[str]]]) -> None:
        # a self-closing flag on a non-void element is ignored, as browsers do
        self.handle_starttag(tag, attrs)

    def handle_endtag(self, tag: str) -> None:
        self._flush_text()
        tag = tag.lower()
        for i in range(len(self.stack) - 1, 0, -1):
            if self.stack[i].tag == tag:
                self._close_to(i)
                return
        # stray end tag: dropped

    def handle_data(self, data: str) -> None:
        self.pending_text.append(data)

    def finish(self) -> ElementNode:
        self.close()
        self._flush_text()
        return self.root


def parse_document(data: Union[bytes, str], encoding_hint: Optional[str] = None) -> ElementNode:
    """Parse HTML into a tree rooted at a synthetic ``#document`` element.

    Never raises on any input; undecodable bytes become U+FFFD.
    """
    text = data if isinstance(data, str) else decode_bytes(data, encoding_hint)
    builder = _TreeBuilder()
    try:
        builder.feed(text)
    except Exception:  # pragma: no cover - tokenizer is tolerant; keep the total contract anyway
        builder.pending_text.append(builder.rawdata)
        builder.rawdata = ""
    try:
        return builder.finish()
    except Exception:  # pragma: no cover
        builder.rawdata = ""
        builder._flush_text()
        return builder.root


def _resolve(href: str, base: Optional[str]) -> tuple[str, bool]:
    href = href.strip()
    if base is None:
        return href, False
    try:
        urlsplit(href)
        resolved = urljoin(base, href)
    except ValueError:
        return href, True
    return resolved, False


def resolve_url(href: str, base: str) -> str:
    """Resolve ``href`` against an absolute ``base``; unparseable input comes back verbatim."""
    return _resolve(href, base)[0]


def extract_links(root: ElementNode, base_url: Optional[str] = None) -> list[Hyperlink]:
    links = []
    for node in root.iter():
        if node.tag != "a" or "href" not in node.attributes:
            continue
        raw = node.attributes["href"]
        resolved, unresolved = _resolve(raw, base_url)
        links.append(
            Hyperlink(
                href_raw=raw,
                href_resolved=resolved,
                anchor_text=normalize_space(node.text_content()),
                anchor_node=node.node_id,
                title_attr=node.attributes.get("title"),
                unresolved=unresolved,
            )
        )
    return links


def index_nodes(root: ElementNode) -> dict[int, Union[ElementNode, TextRun]]:
    return {n.node_id: n for n in root.iter_all()}
