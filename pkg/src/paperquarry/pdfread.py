"""Minimal PDF reader: positioned text runs and ruling segments.

No PDF parsing library is available in the deployment environment, so this
module implements the subset of the format the service needs: object
scanning (robust against broken xref tables), Flate/ASCII85 filters,
object streams, the page tree, and a content-stream interpreter that
yields glyph runs and straight stroked line segments.  Glyph advances for
the standard 14 fonts come from reportlab's AFM tables; embedded /Widths
arrays are honored when present.

Scanned raster-only PDFs yield pages with no text boxes; OCR is an
adapter concern elsewhere.
"""

from __future__ import annotations

import base64
import re
import zlib
from dataclasses import dataclass

from reportlab.pdfbase import pdfmetrics

from .config import PipelineConfig
from .errors import EncryptedPdf, MalformedPdf
from .model import PageContent, TextBox

__all__ = ["PdfFile", "parse_pdf", "read_doc_info"]


# --- object model -----------------------------------------------------------

class Name(str):
    """A PDF name token, distinct from a string literal."""


class PdfString(bytes):
    """A string literal token, distinct from a bare keyword."""


@dataclass(frozen=True)
class Ref:
    num: int
    gen: int


_WHITESPACE = b"\x00\t\n\x0c\r "
_DELIMS = b"()<>[]{}/%"


class _Lexer:
    def __init__(self, data: bytes, pos: int = 0):
        self.data = data
        self.pos = pos

    def _skip_ws(self) -> None:
        data, n = self.data, len(self.data)
        while self.pos < n:
            ch = self.data[self.pos]
            if ch in _WHITESPACE:
                self.pos += 1
            elif ch == 0x25:  # '%' comment to end of line
                while self.pos < n and data[self.pos] not in b"\r\n":
                    self.pos += 1
            else:
                return

    def peek_keyword(self) -> bytes | None:
        save = self.pos
        try:
            tok = self.next_token()
        except MalformedPdf:
            self.pos = save
            return None
        self.pos = save
        return tok if isinstance(tok, bytes) and not isinstance(tok, PdfString) else None

    def next_token(self):
        """Returns python value, Name, Ref markers ('R' handled by parser), or bytes keyword."""
        self._skip_ws()
        data, n = self.data, len(self.data)
        if self.pos >= n:
            raise MalformedPdf("unexpected end of data")
        ch = data[self.pos]
        if ch == 0x2F:  # /
            return self._name()
        if ch == 0x28:  # (
            return self._literal_string()
        if ch == 0x3C:  # <
            if self.pos + 1 < n and data[self.pos + 1] == 0x3C:
                self.pos += 2
                return b"<<"
            return self._hex_string()
        if ch == 0x3E:  # >
            if self.pos + 1 < n and data[self.pos + 1] == 0x3E:
                self.pos += 2
                return b">>"
            raise MalformedPdf("stray '>'")
        if ch in b"[]{}":
            self.pos += 1
            return bytes([ch])
        if ch in b"+-.0123456789":
            return self._number()
        # bare keyword
        start = self.pos
        while self.pos < n and data[self.pos] not in _WHITESPACE and data[self.pos] not in _DELIMS:
            self.pos += 1
        if self.pos == start:
            raise MalformedPdf(f"bad token at offset {self.pos}")
        return data[start:self.pos]

    def _name(self) -> Name:
        data, n = self.data, len(self.data)
        self.pos += 1
        out = bytearray()
        while self.pos < n:
            ch = data[self.pos]
            if ch in _WHITESPACE or ch in _DELIMS:
                break
            if ch == 0x23 and self.pos + 2 < n:  # #xx escape
                try:
                    out.append(int(data[self.pos + 1:self.pos + 3], 16))
                    self.pos += 3
                    continue
                except ValueError:
                    pass
            out.append(ch)
            self.pos += 1
        return Name(out.decode("latin-1"))

    def _number(self):
        data, n = self.data, len(self.data)
        start = self.pos
        self.pos += 1
        while self.pos < n and data[self.pos] in b"+-.0123456789eE":
            self.pos += 1
        text = data[start:self.pos]
        try:
            if b"." in text or b"e" in text.lower():
                return float(text)
            return int(text)
        except ValueError:
            raise MalformedPdf(f"bad number {text!r}")

    def _literal_string(self) -> bytes:
        data, n = self.data, len(self.data)
        self.pos += 1
        depth = 1
        out = bytearray()
        while self.pos < n:
            ch = data[self.pos]
            if ch == 0x5C:  # backslash
                self.pos += 1
                if self.pos >= n:
                    break
                esc = data[self.pos]
                mapping = {0x6E: 0x0A, 0x72: 0x0D, 0x74: 0x09, 0x62: 0x08, 0x66: 0x0C}
                if esc in mapping:
                    out.append(mapping[esc])
                    self.pos += 1
                elif esc in b"()\\":
                    out.append(esc)
                    self.pos += 1
                elif esc in b"01234567":
                    oct_digits = bytearray()
                    while self.pos < n and len(oct_digits) < 3 and data[self.pos] in b"01234567":
                        oct_digits.append(data[self.pos])
                        self.pos += 1
                    out.append(int(oct_digits, 8) & 0xFF)
                elif esc in b"\r\n":  # line continuation
                    self.pos += 1
                    if esc == 0x0D and self.pos < n and data[self.pos] == 0x0A:
                        self.pos += 1
                else:
                    out.append(esc)
                    self.pos += 1
                continue
            if ch == 0x28:
                depth += 1
            elif ch == 0x29:
                depth -= 1
                if depth == 0:
                    self.pos += 1
                    return PdfString(out)
            out.append(ch)
            self.pos += 1
        raise MalformedPdf("unterminated string")

    def _hex_string(self) -> bytes:
        data, n = self.data, len(self.data)
        self.pos += 1
        digits = bytearray()
        while self.pos < n and data[self.pos] != 0x3E:
            if data[self.pos] in b"0123456789abcdefABCDEF":
                digits.append(data[self.pos])
            self.pos += 1
        self.pos += 1
        if len(digits) % 2:
            digits.append(0x30)
        try:
            return PdfString(bytes.fromhex(digits.decode("ascii")))
        except ValueError:
            raise MalformedPdf("bad hex string")


class _Parser:
    """Parses one object (dict/array/scalar) at a lexer position."""

    def __init__(self, lexer: _Lexer):
        self.lex = lexer

    def parse(self):
        tok = self.lex.next_token()
        return self._from_token(tok)

    def _from_token(self, tok):
        if isinstance(tok, (PdfString, Name, float, bool)) or tok is None:
            return tok
        if tok == b"<<":
            return self._dict()
        if tok == b"[":
            return self._array()
        if tok == b"true":
            return True
        if tok == b"false":
            return False
        if tok == b"null":
            return None
        if isinstance(tok, int):
            # possible indirect reference: "num gen R"
            save = self.lex.pos
            try:
                tok2 = self.lex.next_token()
                tok3 = self.lex.next_token()
            except MalformedPdf:
                self.lex.pos = save
                return tok
            if isinstance(tok2, int) and isinstance(tok3, bytes) and not isinstance(tok3, PdfString) and tok3 == b"R":
                return Ref(tok, tok2)
            self.lex.pos = save
            return tok
        return tok

    def _dict(self) -> dict:
        out = {}
        while True:
            tok = self.lex.next_token()
            if tok == b">>":
                return out
            if not isinstance(tok, Name):
                raise MalformedPdf(f"dict key is not a name: {tok!r}")
            out[str(tok)] = self.parse()

    def _array(self) -> list:
        out = []
        while True:
            save = self.lex.pos
            tok = self.lex.next_token()
            if tok == b"]" and not isinstance(tok, PdfString):
                return out
            self.lex.pos = save
            out.append(self.parse())


# --- filters ----------------------------------------------------------------

def _apply_filters(raw: bytes, filters, params) -> bytes:
    if filters is None:
        return raw
    if not isinstance(filters, list):
        filters = [filters]
    data = raw
    for f in filters:
        name = str(f)
        if name == "FlateDecode":
            try:
                data = zlib.decompress(data)
            except zlib.error as exc:
                raise MalformedPdf(f"flate error: {exc}")
        elif name == "ASCII85Decode":
            stripped = bytes(data).strip()
            if stripped.endswith(b"~>"):
                stripped = stripped[:-2]
            try:
                data = base64.a85decode(re.sub(rb"\s", b"", stripped))
            except ValueError as exc:
                raise MalformedPdf(f"ascii85 error: {exc}")
        elif name == "ASCIIHexDecode":
            hex_part = re.sub(rb"[^0-9A-Fa-f]", b"", data.split(b">")[0])
            if len(hex_part) % 2:
                hex_part += b"0"
            data = bytes.fromhex(hex_part.decode("ascii"))
        else:
            # image or unsupported filter: keep raw, caller ignores
            return raw
    if isinstance(params, dict) and params.get("Predictor", 1) > 1:
        data = _undo_png_predictor(data, params)
    return data


def _undo_png_predictor(data: bytes, params: dict) -> bytes:
    columns = int(params.get("Columns", 1))
    colors = int(params.get("Colors", 1))
    bpc = int(params.get("BitsPerComponent", 8))
    rowlen = (columns * colors * bpc + 7) // 8
    stride = rowlen + 1
    out = bytearray()
    prev = bytearray(rowlen)
    for off in range(0, len(data) - stride + 1, stride):
        ftype = data[off]
        row = bytearray(data[off + 1:off + 1 + rowlen])
        bpp = max(1, colors * bpc // 8)
        for i in range(rowlen):
            left = row[i - bpp] if i >= bpp else 0
            up = prev[i]
            if ftype == 0:
                pass
            elif ftype == 1:
                row[i] = (row[i] + left) & 0xFF
            elif ftype == 2:
                row[i] = (row[i] + up) & 0xFF
            elif ftype == 3:
                row[i] = (row[i] + (left + up) // 2) & 0xFF
            elif ftype == 4:
                ul = prev[i - bpp] if i >= bpp else 0
                p = left + up - ul
                pa, pb, pc = abs(p - left), abs(p - up), abs(p - ul)
                pred = left if (pa <= pb and pa <= pc) else (up if pb <= pc else ul)
                row[i] = (row[i] + pred) & 0xFF
        out.extend(row)
        prev = row
    return bytes(out)


# --- document ---------------------------------------------------------------

@dataclass
class _Stream:
    dict: dict
    raw: bytes

    def decode(self) -> bytes:
        return _apply_filters(self.raw, self.dict.get("Filter"), self.dict.get("DecodeParms"))


_OBJ_RE = re.compile(rb"(\d{1,10})\s+(\d{1,5})\s+obj\b")


class PdfFile:
    """A parsed PDF: object map, trailer, page tree."""

    def __init__(self, data: bytes):
        if not isinstance(data, (bytes, bytearray)) or not data.strip():
            raise MalformedPdf("empty input")
        if b"%PDF-" not in data[:1024]:
            raise MalformedPdf("missing %PDF header")
        self.data = bytes(data)
        self.objects: dict[int, object] = {}
        self._scan_objects()
        self.trailer = self._collect_trailer()
        if self._resolve(self.trailer.get("Encrypt")) is not None:
            raise EncryptedPdf("document is password-protected")
        if not self.objects:
            raise MalformedPdf("no objects found")

    # object table -----------------------------------------------------------

    def _scan_objects(self) -> None:
        data = self.data
        for m in _OBJ_RE.finditer(data):
            num = int(m.group(1))
            lex = _Lexer(data, m.end())
            try:
                obj = _Parser(lex).parse()
                if isinstance(obj, dict) and lex.peek_keyword() == b"stream":
                    lex.next_token()
                    start = lex.pos
                    if data[start:start + 2] == b"\r\n":
                        start += 2
                    elif data[start:start + 1] in (b"\n", b"\r"):
                        start += 1
                    length = obj.get("Length")
                    if isinstance(length, Ref):
                        length = None
                    if isinstance(length, int) and data[start + length:start + length + 20].lstrip().startswith(b"endstream"):
                        raw = data[start:start + length]
                    else:
                        end = data.find(b"endstream", start)
                        if end < 0:
                            continue
                        raw = data[start:end].rstrip(b"\r\n")
                    obj = _Stream(obj, raw)
            except MalformedPdf:
                continue
            self.objects[num] = obj  # later definitions (incremental updates) win
        # expand object streams
        for num, obj in list(self.objects.items()):
            if isinstance(obj, _Stream) and str(obj.dict.get("Type", "")) == "ObjStm":
                self._expand_objstm(obj)

    def _expand_objstm(self, stm: _Stream) -> None:
        try:
            payload = stm.decode()
            count = int(self._resolve(stm.dict.get("N", 0)))
            first = int(self._resolve(stm.dict.get("First", 0)))
        except (MalformedPdf, TypeError, ValueError):
            return
        lex = _Lexer(payload, 0)
        pairs = []
        try:
            for _ in range(count):
                onum = lex.next_token()
                ooff = lex.next_token()
                pairs.append((int(onum), int(ooff)))
        except (MalformedPdf, TypeError, ValueError):
            return
        for onum, ooff in pairs:
            if onum in self.objects:
                continue
            try:
                self.objects[onum] = _Parser(_Lexer(payload, first + ooff)).parse()
            except MalformedPdf:
                continue

    def _collect_trailer(self) -> dict:
        merged: dict = {}
        for m in re.finditer(rb"trailer\b", self.data):
            try:
                lex = _Lexer(self.data, m.end())
                d = _Parser(lex).parse()
                if isinstance(d, dict):
                    merged.update(d)
            except MalformedPdf:
                continue
        if "Root" not in merged:
            # xref-stream PDFs: the stream dict doubles as the trailer
            for obj in self.objects.values():
                if isinstance(obj, _Stream) and str(obj.dict.get("Type", "")) == "XRef":
                    merged.update(obj.dict)
        if "Root" not in merged:
            for num, obj in self.objects.items():
                if isinstance(obj, dict) and str(obj.get("Type", "")) == "Catalog":
                    merged["Root"] = Ref(num, 0)
                    break
        if "Root" not in merged:
            raise MalformedPdf("no document catalog")
        return merged

    def _resolve(self, obj, depth: int = 0):
        while isinstance(obj, Ref):
            if depth > 32:
                raise MalformedPdf("reference loop")
            obj = self.objects.get(obj.num)
            depth += 1
        return obj

    # page tree --------------------------------------------------------------

    def page_dicts(self) -> list[dict]:
        root = self._resolve(self.trailer["Root"])
        if not isinstance(root, dict):
            raise MalformedPdf("bad catalog")
        pages_root = self._resolve(root.get("Pages"))
        if not isinstance(pages_root, dict):
            raise MalformedPdf("bad page tree")
        out: list[dict] = []
        seen: set[int] = set()

        def walk(node: dict, inherited: dict) -> None:
            if len(out) > 10000:
                raise MalformedPdf("page tree too large")
            merged = dict(inherited)
            for key in ("MediaBox", "Resources", "Rotate"):
                if key in node:
                    merged[key] = node[key]
            ntype = str(node.get("Type", ""))
            if ntype == "Page" or ("Kids" not in node and ntype != "Pages"):
                page = dict(node)
                for key, val in merged.items():
                    page.setdefault(key, val)
                out.append(page)
                return
            for kid in self._resolve(node.get("Kids")) or []:
                if isinstance(kid, Ref):
                    if kid.num in seen:
                        continue
                    seen.add(kid.num)
                kid = self._resolve(kid)
                if isinstance(kid, dict):
                    walk(kid, merged)

        walk(pages_root, {})
        if not out:
            raise MalformedPdf("document has no pages")
        return out

    def info(self) -> dict:
        """Document information dictionary with decoded text values."""
        info = self._resolve(self.trailer.get("Info"))
        out = {}
        if isinstance(info, dict):
            for key, val in info.items():
                val = self._resolve(val)
                if isinstance(val, bytes):
                    out[key] = _decode_text_string(val)
        return out

    def content_bytes(self, page: dict) -> bytes:
        contents = self._resolve(page.get("Contents"))
        streams = contents if isinstance(contents, list) else [contents]
        parts = []
        for item in streams:
            item = self._resolve(item)
            if isinstance(item, _Stream):
                parts.append(item.decode())
        return b"\n".join(parts)

    def fonts(self, page: dict) -> dict[str, "_Font"]:
        resources = self._resolve(page.get("Resources")) or {}
        font_res = self._resolve(resources.get("Font")) or {}
        out = {}
        if isinstance(font_res, dict):
            for res_name, fdict in font_res.items():
                fdict = self._resolve(fdict)
                if isinstance(fdict, dict):
                    out[res_name] = _Font(self, fdict)
        return out


def _decode_text_string(raw: bytes) -> str:
    if raw[:2] in (b"\xfe\xff", b"\xff\xfe"):
        try:
            return raw.decode("utf-16")
        except UnicodeDecodeError:
            pass
    return raw.decode("latin-1")


# --- fonts ------------------------------------------------------------------

_STANDARD_14 = {
    "Helvetica", "Helvetica-Bold", "Helvetica-Oblique", "Helvetica-BoldOblique",
    "Times-Roman", "Times-Bold", "Times-Italic", "Times-BoldItalic",
    "Courier", "Courier-Bold", "Courier-Oblique", "Courier-BoldOblique",
    "Symbol", "ZapfDingbats",
}


class _Font:
    def __init__(self, doc: PdfFile, fdict: dict):
        base = str(doc._resolve(fdict.get("BaseFont", "")) or "")
        if len(base) > 7 and base[6] == "+":
            base = base[7:]  # subset prefix
        self.base = base
        self.widths = None
        self.first_char = 0
        self.missing = 500.0
        widths = doc._resolve(fdict.get("Widths"))
        if isinstance(widths, list):
            try:
                self.widths = [float(doc._resolve(w)) for w in widths]
                self.first_char = int(doc._resolve(fdict.get("FirstChar", 0)))
            except (TypeError, ValueError):
                self.widths = None
        desc = doc._resolve(fdict.get("FontDescriptor"))
        if isinstance(desc, dict):
            mw = doc._resolve(desc.get("MissingWidth"))
            if isinstance(mw, (int, float)):
                self.missing = float(mw)
        self.is_standard = self.base in _STANDARD_14

    def string_width(self, text: str, size: float) -> float:
        if self.widths is not None:
            total = 0.0
            for ch in text.encode("latin-1", "replace"):
                idx = ch - self.first_char
                if 0 <= idx < len(self.widths):
                    total += self.widths[idx]
                else:
                    total += self.missing
            return total / 1000.0 * size
        if self.is_standard:
            try:
                return pdfmetrics.stringWidth(text, self.base, size)
            except (KeyError, UnicodeEncodeError):
                pass
        return 0.5 * size * len(text)

    def ascent_descent(self, size: float) -> tuple[float, float]:
        if self.is_standard:
            try:
                asc, desc = pdfmetrics.getAscentDescent(self.base, size)
                return asc, desc
            except KeyError:
                pass
        return 0.75 * size, -0.25 * size


def _fallback_font() -> _Font:
    font = _Font.__new__(_Font)
    font.base = ""
    font.widths = None
    font.first_char = 0
    font.missing = 500.0
    font.is_standard = False
    return font


_DEFAULT_FONT = _fallback_font()


# --- content stream interpretation ------------------------------------------

Matrix = tuple[float, float, float, float, float, float]
_IDENT: Matrix = (1, 0, 0, 1, 0, 0)


def _mat_mul(m: Matrix, n: Matrix) -> Matrix:
    a, b, c, d, e, f = m
    a2, b2, c2, d2, e2, f2 = n
    return (
        a * a2 + b * c2,
        a * b2 + b * d2,
        c * a2 + d * c2,
        c * b2 + d * d2,
        e * a2 + f * c2 + e2,
        e * b2 + f * d2 + f2,
    )


def _mat_apply(m: Matrix, x: float, y: float) -> tuple[float, float]:
    a, b, c, d, e, f = m
    return (a * x + c * y + e, b * x + d * y + f)


@dataclass
class _GlyphRun:
    x: float            # baseline start, device space
    y: float
    width: float
    size: float         # effective font size, device space
    text: str
    ascent: float
    descent: float


@dataclass
class _TextState:
    font: _Font | None = None
    size: float = 0.0
    char_spacing: float = 0.0
    word_spacing: float = 0.0
    h_scale: float = 1.0
    leading: float = 0.0
    rise: float = 0.0


class _ContentInterpreter:
    """Executes one page's content stream, collecting glyph runs and rulings."""

    def __init__(self, fonts: dict[str, _Font], cfg: PipelineConfig):
        self.fonts = fonts
        self.cfg = cfg
        self.runs: list[_GlyphRun] = []
        self.segments: list[tuple[float, float, float, float]] = []
        self.ctm: Matrix = _IDENT
        self.stack: list[Matrix] = []
        self.ts = _TextState()
        self.tm: Matrix = _IDENT
        self.tlm: Matrix = _IDENT
        self.path: list[tuple[float, float, float, float]] = []
        self.cur: tuple[float, float] | None = None
        self.subpath_start: tuple[float, float] | None = None

    def run(self, content: bytes) -> None:
        lex = _Lexer(content, 0)
        parser = _Parser(lex)
        operands: list = []
        while True:
            lex._skip_ws()
            if lex.pos >= len(content):
                break
            save = lex.pos
            try:
                tok = lex.next_token()
            except MalformedPdf:
                break
            if isinstance(tok, bytes) and not isinstance(tok, PdfString) and tok not in (b"<<", b"[", b"]", b">>"):
                if tok == b"true":
                    operands.append(True)
                elif tok == b"false":
                    operands.append(False)
                elif tok == b"null":
                    operands.append(None)
                else:
                    self._op(tok, operands)
                    operands = []
            else:
                lex.pos = save
                try:
                    operands.append(parser.parse())
                except MalformedPdf:
                    break

    # operators --------------------------------------------------------------

    def _op(self, op: bytes, args: list) -> None:
        try:
            if op == b"T*":
                self._next_line()
                return
            if op == b"'":
                self._next_line()
                self._op_Tj(args)
                return
            if op == b'"':
                if len(args) >= 3:
                    self.ts.word_spacing = float(args[-3])
                    self.ts.char_spacing = float(args[-2])
                self._next_line()
                self._op_Tj(args)
                return
        except (TypeError, ValueError, IndexError):
            return
        try:
            handler = getattr(self, "_op_" + op.decode("ascii"), None)
        except UnicodeDecodeError:
            return
        if handler is not None:
            try:
                handler(args)
            except (TypeError, ValueError, IndexError):
                pass  # tolerate malformed operands, keep going

    def _op_q(self, args):
        self.stack.append(self.ctm)

    def _op_Q(self, args):
        if self.stack:
            self.ctm = self.stack.pop()

    def _op_cm(self, args):
        a, b, c, d, e, f = (float(v) for v in args[-6:])
        self.ctm = _mat_mul((a, b, c, d, e, f), self.ctm)

    # text
    def _op_BT(self, args):
        self.tm = _IDENT
        self.tlm = _IDENT

    def _op_ET(self, args):
        pass

    def _op_Tf(self, args):
        name, size = args[-2], float(args[-1])
        self.ts.font = self.fonts.get(str(name))
        self.ts.size = size

    def _op_Td(self, args):
        tx, ty = float(args[-2]), float(args[-1])
        self.tlm = _mat_mul((1, 0, 0, 1, tx, ty), self.tlm)
        self.tm = self.tlm

    def _op_TD(self, args):
        self.ts.leading = -float(args[-1])
        self._op_Td(args)

    def _op_Tm(self, args):
        a, b, c, d, e, f = (float(v) for v in args[-6:])
        self.tlm = (a, b, c, d, e, f)
        self.tm = self.tlm

    def _op_TL(self, args):
        self.ts.leading = float(args[-1])

    def _op_Tc(self, args):
        self.ts.char_spacing = float(args[-1])

    def _op_Tw(self, args):
        self.ts.word_spacing = float(args[-1])

    def _op_Tz(self, args):
        self.ts.h_scale = float(args[-1]) / 100.0

    def _op_Ts(self, args):
        self.ts.rise = float(args[-1])

    def _next_line(self):
        self.tlm = _mat_mul((1, 0, 0, 1, 0, -self.ts.leading), self.tlm)
        self.tm = self.tlm

    def _op_Tj(self, args):
        if args and isinstance(args[-1], bytes):
            self._show(args[-1])

    def _op_TJ(self, args):
        if not args or not isinstance(args[-1], list):
            return
        for item in args[-1]:
            if isinstance(item, bytes):
                self._show(item)
            elif isinstance(item, (int, float)):
                dx = -float(item) / 1000.0 * self.ts.size * self.ts.h_scale
                self.tm = _mat_mul((1, 0, 0, 1, dx, 0), self.tm)

    def _show(self, raw: bytes) -> None:
        text = raw.decode("latin-1")
        if not text:
            return
        font = self.ts.font or _DEFAULT_FONT
        w_text = font.string_width(text, self.ts.size)
        w_text += self.ts.char_spacing * len(text) + self.ts.word_spacing * text.count(" ")
        w_text *= self.ts.h_scale
        combined = _mat_mul(self.tm, self.ctm)
        x0, y0 = _mat_apply(combined, 0, self.ts.rise)
        x1, _ = _mat_apply(combined, w_text, self.ts.rise)
        scale_y = abs(combined[3]) or 1.0
        eff_size = self.ts.size * scale_y
        asc, desc = font.ascent_descent(eff_size)
        if eff_size > 0 and text.strip():
            self.runs.append(_GlyphRun(min(x0, x1), y0, abs(x1 - x0), eff_size, text, asc, desc))
        self.tm = _mat_mul((1, 0, 0, 1, w_text, 0), self.tm)

    # paths
    def _op_m(self, args):
        self.cur = (float(args[-2]), float(args[-1]))
        self.subpath_start = self.cur

    def _op_l(self, args):
        pt = (float(args[-2]), float(args[-1]))
        if self.cur is not None:
            self.path.append((*self.cur, *pt))
        self.cur = pt

    def _op_re(self, args):
        x, y, w, h = (float(v) for v in args[-4:])
        self.path.extend([
            (x, y, x + w, y),
            (x + w, y, x + w, y + h),
            (x + w, y + h, x, y + h),
            (x, y + h, x, y),
        ])
        self.cur = (x, y)
        self.subpath_start = self.cur

    def _op_c(self, args):
        self.cur = (float(args[-2]), float(args[-1]))

    def _op_v(self, args):
        self.cur = (float(args[-2]), float(args[-1]))

    def _op_y(self, args):
        self.cur = (float(args[-2]), float(args[-1]))

    def _op_h(self, args):
        if self.cur is not None and self.subpath_start is not None and self.cur != self.subpath_start:
            self.path.append((*self.cur, *self.subpath_start))
            self.cur = self.subpath_start

    def _op_S(self, args):
        self._stroke()

    def _op_s(self, args):
        self._op_h(args)
        self._stroke()

    def _op_B(self, args):
        self._stroke()

    def _op_b(self, args):
        self._op_h(args)
        self._stroke()

    def _op_f(self, args):
        self.path = []
        self.cur = None

    def _op_F(self, args):
        self._op_f(args)

    def _op_W(self, args):
        pass

    def _op_n(self, args):
        self.path = []
        self.cur = None

    def _stroke(self) -> None:
        tol = self.cfg.ruling_axis_tol_pt
        for x0, y0, x1, y1 in self.path:
            dx0, dy0 = _mat_apply(self.ctm, x0, y0)
            dx1, dy1 = _mat_apply(self.ctm, x1, y1)
            if abs(dy1 - dy0) <= tol and abs(dx1 - dx0) > tol:
                ym = (dy0 + dy1) / 2.0
                self.segments.append((min(dx0, dx1), ym, max(dx0, dx1), ym))
            elif abs(dx1 - dx0) <= tol and abs(dy1 - dy0) > tol:
                xm = (dx0 + dx1) / 2.0
                self.segments.append((xm, min(dy0, dy1), xm, max(dy0, dy1)))
        self.path = []
        self.cur = None


# --- text box grouping ------------------------------------------------------

def _group_runs(runs: list[_GlyphRun], cfg: PipelineConfig) -> list[TextBox]:
    if not runs:
        return []
    runs = sorted(runs, key=lambda r: (-r.y, r.x))
    lines: list[list[_GlyphRun]] = []
    for run in runs:
        if lines and abs(lines[-1][0].y - run.y) <= cfg.box_baseline_tol_pt:
            lines[-1].append(run)
        else:
            lines.append([run])
    boxes: list[TextBox] = []
    for line in lines:
        line.sort(key=lambda r: r.x)
        group: list[_GlyphRun] = [line[0]]
        for run in line[1:]:
            prev = group[-1]
            gap = run.x - (prev.x + prev.width)
            if gap <= cfg.box_merge_gap_em * max(prev.size, run.size):
                group.append(run)
            else:
                boxes.append(_box_from_group(group))
                group = [run]
        boxes.append(_box_from_group(group))
    return [b for b in boxes if b is not None]


_SPACE_GAP_EM = 0.2  # a visible inter-run gap wider than this becomes one space


def _box_from_group(group: list[_GlyphRun]) -> TextBox | None:
    parts = [group[0].text]
    for prev, run in zip(group, group[1:]):
        gap = run.x - (prev.x + prev.width)
        if gap > _SPACE_GAP_EM * max(prev.size, run.size) and not prev.text.endswith(" ") and not run.text.startswith(" "):
            parts.append(" ")
        parts.append(run.text)
    text = "".join(parts)
    if not text.strip():
        return None
    x0 = min(r.x for r in group)
    x1 = max(r.x + r.width for r in group)
    y0 = min(r.y + r.descent for r in group)
    y1 = max(r.y + r.ascent for r in group)
    size = max(r.size for r in group)
    if x1 <= x0:
        x1 = x0 + 0.1
    return TextBox((x0, y0, x1, y1), text, size)


# --- public API -------------------------------------------------------------

def parse_pdf(data: bytes, cfg: PipelineConfig | None = None) -> list[PageContent]:
    """Parse PDF bytes into positioned page content.

    Raises MalformedPdf for unreadable input and EncryptedPdf for
    password-protected documents.
    """
    cfg = cfg or PipelineConfig()
    doc = PdfFile(data)
    pages: list[PageContent] = []
    for index, pdict in enumerate(doc.page_dicts()):
        media = doc._resolve(pdict.get("MediaBox")) or [0, 0, 612, 792]
        try:
            mx0, my0, mx1, my1 = (float(doc._resolve(v)) for v in media)
        except (TypeError, ValueError):
            mx0, my0, mx1, my1 = 0, 0, 612, 792
        width, height = abs(mx1 - mx0), abs(my1 - my0)
        interp = _ContentInterpreter(doc.fonts(pdict), cfg)
        try:
            interp.run(doc.content_bytes(pdict))
        except MalformedPdf:
            pass
        boxes = _group_runs(interp.runs, cfg)
        boxes = [_clip_box(b, width, height) for b in boxes]
        segments = [
            s for s in interp.segments
            if 0 <= min(s[0], s[2]) and max(s[0], s[2]) <= width + 1
            and 0 <= min(s[1], s[3]) and max(s[1], s[3]) <= height + 1
        ]
        pages.append(PageContent(
            page_index=index,
            width_pt=width or 612.0,
            height_pt=height or 792.0,
            text_boxes=[b for b in boxes if b is not None],
            ruling_segments=segments,
        ))
    return pages


def _clip_box(box: TextBox, width: float, height: float) -> TextBox | None:
    x0, y0, x1, y1 = box.bbox
    x0, y0 = max(0.0, x0), max(0.0, y0)
    x1, y1 = min(width, x1), min(height, y1)
    if x0 >= x1 or y0 >= y1:
        return None
    return TextBox((x0, y0, x1, y1), box.text, box.font_size_pt)


def read_doc_info(data: bytes) -> dict:
    """Document information dictionary (Title, Author, Subject, ...)."""
    return PdfFile(data).info()
