"""Text extraction from classic (non-encrypted, xref-table) PDF files.

Supports uncompressed and FlateDecode content streams and the common text
show operators (Tj, TJ, ', "). Pages are walked in page-tree order. This is
deliberately small: image-only pages produce no text, and exotic encodings
(CID/Type0 with ToUnicode maps) are out of scope.
"""

from __future__ import annotations

import re
import zlib

_OBJ_HEADER = re.compile(rb"(\d+)\s+(\d+)\s+obj\b")
_STREAM_START = re.compile(rb"(?<![a-zA-Z])stream(\r\n|\r|\n)")
_ROOT_REF = re.compile(rb"/Root\s+(\d+)\s+\d+\s+R")
_PAGES_REF = re.compile(rb"/Pages\s+(\d+)\s+\d+\s+R")
_KIDS = re.compile(rb"/Kids\s*\[(.*?)\]", re.DOTALL)
_REF = re.compile(rb"(\d+)\s+\d+\s+R")
_CONTENTS_ONE = re.compile(rb"/Contents\s+(\d+)\s+\d+\s+R")
_CONTENTS_MANY = re.compile(rb"/Contents\s*\[(.*?)\]", re.DOTALL)
_BT_ET = re.compile(r"BT(.*?)ET", re.DOTALL)

_ESCAPES = {
    "n": "\n", "r": "\r", "t": "\t", "b": "\b", "f": "\f",
    "(": "(", ")": ")", "\\": "\\",
}


def extract_pages(data: bytes) -> list[str]:
    """Return one text string per page, in page order."""
    if b"/Encrypt" in data:
        raise ValueError("encrypted PDF is not supported")
    bodies = _object_bodies(data)
    page_nums = _page_order(data, bodies)
    pages = []
    for num in page_nums:
        content = _page_content(bodies, bodies[num])
        pages.append(_content_text(content))
    return pages


def _object_bodies(data: bytes) -> dict[int, bytes]:
    """Map object number -> body bytes, skipping over embedded streams."""
    bodies: dict[int, bytes] = {}
    for m in _OBJ_HEADER.finditer(data):
        start = m.end()
        search = start
        while True:
            end = data.find(b"endobj", search)
            if end == -1:
                end = len(data)
                break
            sm = _STREAM_START.search(data, search, end)
            if sm is None:
                break
            es = data.find(b"endstream", sm.end())
            if es == -1:
                break
            search = es + len(b"endstream")
        # Later definitions win (incremental updates append new versions).
        bodies[int(m.group(1))] = data[start:end]
    return bodies


def _page_order(data: bytes, bodies: dict[int, bytes]) -> list[int]:
    root_matches = _ROOT_REF.findall(data)
    order: list[int] = []

    def walk(num: int, depth: int = 0) -> None:
        if depth > 64:
            return
        body = bodies.get(num)
        if body is None:
            return
        kids = _KIDS.search(body)
        if kids is not None:
            for ref in _REF.finditer(kids.group(1)):
                walk(int(ref.group(1)), depth + 1)
        elif re.search(rb"/Type\s*/Page\b", body):
            order.append(num)

    if root_matches:
        root = bodies.get(int(root_matches[-1]), b"")
        pages_ref = _PAGES_REF.search(root)
        if pages_ref is not None:
            walk(int(pages_ref.group(1)))
    if not order:
        # No usable page tree; fall back to definition order of /Page objects.
        for num in sorted(bodies):
            if re.search(rb"/Type\s*/Page\b", bodies[num]):
                order.append(num)
    return order


def _page_content(bodies: dict[int, bytes], page_body: bytes) -> bytes:
    refs: list[int] = []
    many = _CONTENTS_MANY.search(page_body)
    if many is not None:
        refs = [int(r.group(1)) for r in _REF.finditer(many.group(1))]
    else:
        one = _CONTENTS_ONE.search(page_body)
        if one is not None:
            refs = [int(one.group(1))]
    parts = []
    for num in refs:
        body = bodies.get(num)
        if body is not None:
            parts.append(_decode_stream(body))
    return b"".join(parts)


def _decode_stream(body: bytes) -> bytes:
    m = _STREAM_START.search(body)
    if m is None:
        return b""
    end = body.rfind(b"endstream")
    if end == -1:
        return b""
    raw = body[m.end():end]
    # The EOL before "endstream" is not part of the stream data.
    if raw.endswith(b"\r\n"):
        raw = raw[:-2]
    elif raw.endswith(b"\n") or raw.endswith(b"\r"):
        raw = raw[:-1]

    data = raw
    try:
        for name in _stream_filters(body[:m.start()]):
            if name == "FlateDecode":
                data = zlib.decompress(data)
            elif name == "ASCII85Decode":
                data = _a85decode(data)
            elif name == "ASCIIHexDecode":
                hexdata = re.sub(rb"[\s>]", b"", data)
                data = bytes.fromhex(hexdata.decode("ascii"))
            else:
                return b""  # unsupported filter (e.g. image codecs)
    except (ValueError, zlib.error):
        return b""
    return data


def _stream_filters(header: bytes) -> list[str]:
    arr = re.search(rb"/Filter\s*\[(.*?)\]", header, re.DOTALL)
    if arr is not None:
        return [m.group(1).decode("ascii") for m in re.finditer(rb"/([A-Za-z0-9]+)", arr.group(1))]
    one = re.search(rb"/Filter\s*/([A-Za-z0-9]+)", header)
    if one is not None:
        return [one.group(1).decode("ascii")]
    return []


def _a85decode(data: bytes) -> bytes:
    import base64

    stripped = re.sub(rb"\s+", b"", data)
    if stripped.endswith(b"~>"):
        stripped = stripped[:-2]
    if stripped.startswith(b"<~"):
        stripped = stripped[2:]
    return base64.a85decode(b"<~" + stripped + b"~>", adobe=True)


def _content_text(content: bytes) -> str:
    text = content.decode("latin-1", errors="replace")
    blocks = []
    for m in _BT_ET.finditer(text):
        block = _block_text(m.group(1))
        block = re.sub(r"\n{2,}", "\n", block).strip("\n")
        if block:
            blocks.append(block)
    return "\n".join(blocks)


def _block_text(block: str) -> str:
    out: list[str] = []
    array_parts: list[str] = []
    in_array = False
    last_str = ""
    i = 0
    n = len(block)
    while i < n:
        c = block[i]
        if c == "(":
            s, i = _read_literal(block, i)
            if in_array:
                array_parts.append(s)
            else:
                last_str = s
        elif c == "<" and block[i + 1:i + 2] != "<":
            s, i = _read_hex(block, i)
            if in_array:
                array_parts.append(s)
            else:
                last_str = s
        elif c == "[":
            in_array = True
            array_parts = []
            i += 1
        elif c == "]":
            in_array = False
            i += 1
        elif c.isalpha() or c in "'\"*":
            m = re.match(r"[A-Za-z'\"*]+", block[i:])
            op = m.group(0)
            i += m.end()
            if op == "Tj":
                out.append(last_str)
            elif op == "TJ":
                out.append("".join(array_parts))
                array_parts = []
            elif op in ("'", '"'):
                out.append("\n" + last_str)
            elif op in ("Td", "TD", "Tm") or op == "T*":
                out.append("\n")
        else:
            i += 1
    return "".join(out)


def _read_literal(block: str, i: int) -> tuple[str, int]:
    """Parse a ( ... ) string starting at index i; returns (text, next index)."""
    assert block[i] == "("
    out: list[str] = []
    depth = 1
    i += 1
    n = len(block)
    while i < n and depth > 0:
        c = block[i]
        if c == "\\":
            nxt = block[i + 1:i + 2]
            if nxt in _ESCAPES:
                out.append(_ESCAPES[nxt])
                i += 2
            elif nxt.isdigit():
                j = i + 1
                while j < min(i + 4, n) and block[j].isdigit():
                    j += 1
                out.append(chr(int(block[i + 1:j], 8) & 0xFF))
                i = j
            elif nxt in ("\n", "\r"):
                i += 2  # line continuation
            else:
                i += 1
        elif c == "(":
            depth += 1
            out.append(c)
            i += 1
        elif c == ")":
            depth -= 1
            if depth > 0:
                out.append(c)
            i += 1
        else:
            out.append(c)
            i += 1
    return "".join(out), i


def _read_hex(block: str, i: int) -> tuple[str, int]:
    end = block.find(">", i)
    if end == -1:
        return "", len(block)
    digits = re.sub(r"\s+", "", block[i + 1:end])
    if len(digits) % 2:
        digits += "0"
    chars = [chr(int(digits[j:j + 2], 16)) for j in range(0, len(digits), 2)]
    return "".join(chars), end + 1
