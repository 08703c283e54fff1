"""Namespace-aware XML tree with deterministic canonical serialization.

The writer produces byte-identical output for equal documents: 2-space
indentation, namespace declarations first (sorted by prefix), attributes
sorted by qualified name, empty elements self-closed.  The parser is built on
expat with namespace processing; it refuses DOCTYPE declarations outright, so
no DTD or external entity is ever processed, and it records the in-scope
prefix map on every element for resolving QName-valued attributes.
"""
from __future__ import annotations

import xml.parsers.expat
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .errors import XmlParseError
from .names import QName, is_ncname

Child = Union["XmlElement", str]


class XmlElement:
    """One element: name, attributes in insertion order, children.

    Treated as a value; nothing in this package mutates an element after
    construction.  ``nsmap`` is the prefix table in scope where the parser saw
    the element (empty for built trees).
    """

    __slots__ = ("name", "attributes", "children", "nsmap")

    def __init__(
        self,
        name: QName,
        attributes: Iterable[tuple[QName, str]] = (),
        children: Iterable[Child] = (),
        nsmap: Optional[dict[str, str]] = None,
    ):
        self.name = name
        self.attributes: list[tuple[QName, str]] = list(attributes)
        self.children: list[Child] = list(children)
        self.nsmap: dict[str, str] = dict(nsmap) if nsmap else {}

    def attr(self, name: Union[QName, str]) -> Optional[str]:
        if isinstance(name, str):
            name = QName("", name)
        for qname, value in self.attributes:
            if qname == name:
                return value
        return None

    def element_children(self) -> list["XmlElement"]:
        return [c for c in self.children if isinstance(c, XmlElement)]

    def find_all(self, name: QName) -> list["XmlElement"]:
        return [c for c in self.element_children() if c.name == name]

    def find(self, name: QName) -> Optional["XmlElement"]:
        found = self.find_all(name)
        return found[0] if found else None

    def text(self) -> str:
        return "".join(c for c in self.children if isinstance(c, str))

    def __repr__(self) -> str:
        return f"<XmlElement {self.name} attrs={len(self.attributes)} children={len(self.children)}>"


@dataclass
class XmlDocument:
    """A root element plus the namespace declarations written on it."""

    root: XmlElement
    namespaces: dict[str, str] = field(default_factory=dict)  # prefix -> URI


def _split_expat_name(name: str) -> QName:
    # ParserCreate(namespace_separator="}") yields "uri}local" for qualified names.
    if "}" in name:
        namespace, local = name.rsplit("}", 1)
        return QName(namespace, local)
    return QName("", name)


def parse_xml(data: bytes) -> XmlDocument:
    """Parse into an XmlDocument; whitespace-only text is discarded."""
    parser = xml.parsers.expat.ParserCreate(namespace_separator="}")
    parser.ordered_attributes = True
    parser.buffer_text = True

    root: list[XmlElement] = []
    stack: list[XmlElement] = []
    nsmap_stack: list[dict[str, str]] = [{}]
    pending_decls: list[tuple[str, str]] = []
    root_decls: dict[str, str] = {}
    text_parts: list[str] = []

    def flush_text():
        if not text_parts:
            return
        text = "".join(text_parts)
        text_parts.clear()
        if stack and text.strip():
            stack[-1].children.append(text)

    def start_doctype(*_args):
        raise XmlParseError(
            "DOCTYPE declarations are not allowed",
            parser.ErrorLineNumber or parser.CurrentLineNumber,
            parser.ErrorColumnNumber or parser.CurrentColumnNumber,
        )

    def start_ns(prefix, uri):
        pending_decls.append((prefix or "", uri or ""))

    def start_element(name, attr_list):
        flush_text()
        nsmap = dict(nsmap_stack[-1])
        nsmap.update(pending_decls)
        if not stack:
            root_decls.update(pending_decls)
        pending_decls.clear()
        attributes = []
        for i in range(0, len(attr_list), 2):
            attributes.append((_split_expat_name(attr_list[i]), attr_list[i + 1]))
        element = XmlElement(_split_expat_name(name), attributes, (), nsmap)
        if stack:
            stack[-1].children.append(element)
        else:
            root.append(element)
        stack.append(element)
        nsmap_stack.append(nsmap)

    def end_element(_name):
        flush_text()
        stack.pop()
        nsmap_stack.pop()

    def char_data(text):
        text_parts.append(text)

    parser.StartDoctypeDeclHandler = start_doctype
    parser.StartNamespaceDeclHandler = start_ns
    parser.StartElementHandler = start_element
    parser.EndElementHandler = end_element
    parser.CharacterDataHandler = char_data

    try:
        parser.Parse(data, True)
    except xml.parsers.expat.ExpatError as exc:
        raise XmlParseError(str(exc), exc.lineno, exc.offset) from exc
    if not root:
        raise XmlParseError("no root element")
    return XmlDocument(root[0], root_decls)


_TEXT_ESCAPES = {"&": "&amp;", "<": "&lt;", ">": "&gt;", "\r": "&#13;"}
_ATTR_ESCAPES = {
    "&": "&amp;",
    "<": "&lt;",
    ">": "&gt;",
    '"': "&quot;",
    "\n": "&#10;",
    "\t": "&#9;",
    "\r": "&#13;",
}


def _escape(text: str, table: dict[str, str]) -> str:
    for raw, escaped in table.items():
        text = text.replace(raw, escaped)
    return text


def write_canonical(doc: XmlDocument) -> bytes:
    """Serialize with a fixed layout; equal documents yield identical bytes.

    Every namespace used by an element or qualified attribute must be declared
    in the document table, and attribute names must be unique per element.
    """
    prefix_of: dict[str, str] = {}
    for prefix, uri in sorted(doc.namespaces.items()):
        prefix_of.setdefault(uri, prefix)

    def qualified(name: QName, attribute: bool) -> str:
        if not is_ncname(name.local):
            raise ValueError(f"not a valid XML name: {name.local!r}")
        if not name.namespace:
            return name.local
        prefix = prefix_of.get(name.namespace)
        if prefix is None:
            raise ValueError(f"namespace not declared on the document: {name.namespace!r}")
        if prefix == "":
            if attribute:
                raise ValueError(
                    f"qualified attribute {name} needs an explicit prefix, not the default namespace"
                )
            return name.local
        return f"{prefix}:{name.local}"

    lines: list[str] = ['<?xml version="1.0" encoding="UTF-8"?>']

    def render(element: XmlElement, depth: int, declare: bool):
        indent = "  " * depth
        parts = [qualified(element.name, attribute=False)]
        if declare:
            for prefix, uri in sorted(doc.namespaces.items()):
                attr = f'xmlns:{prefix}' if prefix else "xmlns"
                parts.append(f'{attr}="{_escape(uri, _ATTR_ESCAPES)}"')
        seen: set[str] = set()
        rendered = []
        for qname, value in element.attributes:
            qualified_name = qualified(qname, attribute=True)
            if qualified_name in seen:
                raise ValueError(f"duplicate attribute {qualified_name!r} on {element.name}")
            seen.add(qualified_name)
            rendered.append((qualified_name, value))
        for qualified_name, value in sorted(rendered):
            parts.append(f'{qualified_name}="{_escape(value, _ATTR_ESCAPES)}"')
        open_tag = " ".join(parts)

        elements = element.element_children()
        text = element.text()
        if elements and text.strip():
            raise ValueError(f"mixed content is not supported (element {element.name})")
        if not elements and not text:
            lines.append(f"{indent}<{open_tag}/>")
        elif not elements:
            closing = qualified(element.name, attribute=False)
            lines.append(f"{indent}<{open_tag}>{_escape(text, _TEXT_ESCAPES)}</{closing}>")
        else:
            lines.append(f"{indent}<{open_tag}>")
            for child in elements:
                render(child, depth + 1, declare=False)
            lines.append(f"{indent}</{qualified(element.name, attribute=False)}>")

    render(doc.root, 0, declare=True)
    return ("\n".join(lines) + "\n").encode("utf-8")
