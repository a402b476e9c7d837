"""Tolerant BibTeX parsing.

Entry-level problems (bad field syntax, duplicate keys) produce warnings and
never abort a batch; structural collapse (an entry whose braces never close)
raises BibtexError with the byte offset of the failure. Values keep their
text with LaTeX accent commands decoded, so author names preserve
diacritics.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .model import BibEntry


class BibtexError(ValueError):
    """File-level parse failure; carries the byte offset where parsing died."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


@dataclass
class BibWarning:
    key: str
    message: str

    def __str__(self):
        return f"{self.key}: {self.message}"


# Common LaTeX accent/special forms seen in author and title fields.
_ACCENTS = {
    '\\"a': "ä", '\\"o': "ö", '\\"u': "ü", '\\"A': "Ä", '\\"O': "Ö", '\\"U': "Ü",
    '\\"e': "ë", '\\"i': "ï",
    "\\'a": "á", "\\'e": "é", "\\'i": "í", "\\'o": "ó", "\\'u": "ú", "\\'c": "ć",
    "\\`a": "à", "\\`e": "è", "\\`o": "ò", "\\`u": "ù",
    "\\^a": "â", "\\^e": "ê", "\\^i": "î", "\\^o": "ô", "\\^u": "û",
    "\\~n": "ñ", "\\~a": "ã", "\\~o": "õ",
    "\\c c": "ç", "\\c{c}": "ç",
    "\\ss": "ß", "\\o": "ø", "\\O": "Ø", "\\aa": "å", "\\AA": "Å",
    "\\ae": "æ", "\\AE": "Æ",
    "\\v c": "č", "\\v{c}": "č", "\\v s": "š", "\\v{s}": "š", "\\v z": "ž", "\\v{z}": "ž",
}

_ACCENT_RE = re.compile(
    "|".join(re.escape(k) for k in sorted(_ACCENTS, key=len, reverse=True))
)


def delatex(text: str) -> str:
    """Decode common LaTeX accent commands and drop grouping braces."""
    text = _ACCENT_RE.sub(lambda m: _ACCENTS[m.group(0)], text)
    text = text.replace("{", "").replace("}", "")
    text = text.replace("\\&", "&").replace("~", " ")
    return re.sub(r"\s+", " ", text).strip()


def split_authors(author_field: str) -> tuple[str, ...]:
    """Split a BibTeX author field into display names ("First Last")."""
    names = []
    for chunk in re.split(r"\s+and\s+", delatex(author_field)):
        chunk = chunk.strip().strip(",")
        if not chunk or chunk.lower() == "others":
            continue
        if "," in chunk:
            family, _, given = chunk.partition(",")
            chunk = f"{given.strip()} {family.strip()}".strip()
        names.append(chunk)
    return tuple(names)


def family_name(display_name: str) -> str:
    """Family name of a display-form author name (last whitespace token)."""
    parts = display_name.strip().split()
    return parts[-1] if parts else ""


def first_author_family(entry: BibEntry) -> str:
    authors = entry.authors
    return family_name(authors[0]) if authors else ""


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def eof(self) -> bool:
        return self.pos >= len(self.text)

    def skip_ws(self):
        while not self.eof() and self.text[self.pos].isspace():
            self.pos += 1

    def seek_entry(self) -> bool:
        at = self.text.find("@", self.pos)
        if at < 0:
            self.pos = len(self.text)
            return False
        self.pos = at
        return True

    def read_braced(self) -> str:
        # pos is on '{'; returns content, pos lands after the matching '}'.
        start = self.pos
        depth = 0
        while not self.eof():
            ch = self.text[self.pos]
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    self.pos += 1
                    return self.text[start + 1 : self.pos - 1]
            self.pos += 1
        raise BibtexError("unterminated brace group", start)

    def read_quoted(self) -> str:
        # pos is on '"'; braces may nest inside quoted values.
        start = self.pos
        self.pos += 1
        depth = 0
        while not self.eof():
            ch = self.text[self.pos]
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
            elif ch == '"' and depth == 0:
                self.pos += 1
                return self.text[start + 1 : self.pos - 1]
            self.pos += 1
        raise BibtexError("unterminated quoted value", start)


def parse_bibtex(data: bytes | str) -> tuple[dict[str, BibEntry], list[BibWarning]]:
    """Parse a BibTeX document into entries keyed by citation key.

    Returns (entries, warnings). Duplicate keys warn and keep the last
    entry; entries with unreadable fields warn and keep what parsed.
    Raises BibtexError when an entry's braces never terminate.
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise BibtexError(f"document is not valid UTF-8: {exc.reason}", exc.start) from None
    else:
        text = data

    entries: dict[str, BibEntry] = {}
    warnings: list[BibWarning] = []
    scanner = _Scanner(text)

    while scanner.seek_entry():
        entry_start = scanner.pos
        scanner.pos += 1
        type_match = re.match(r"[A-Za-z]+", text[scanner.pos :])
        if not type_match:
            scanner.pos += 1
            continue
        entry_type = type_match.group(0).lower()
        scanner.pos += type_match.end()
        scanner.skip_ws()
        if entry_type in ("comment", "preamble"):
            if not scanner.eof() and text[scanner.pos] == "{":
                scanner.read_braced()
            continue
        if scanner.eof() or text[scanner.pos] != "{":
            warnings.append(BibWarning(f"@{entry_type}", f"expected '{{' at offset {scanner.pos}"))
            continue
        body = scanner.read_braced()
        body_offset = entry_start
        key, fields, entry_warnings = _parse_entry_body(body, entry_type, body_offset)
        warnings.extend(entry_warnings)
        if key is None:
            continue
        if key in entries:
            warnings.append(BibWarning(key, "duplicate citation key, keeping the last entry"))
        entries[key] = BibEntry(key=key, entry_type=entry_type, fields=tuple(fields))
    return entries, warnings


def _parse_entry_body(body: str, entry_type: str, offset: int):
    warnings: list[BibWarning] = []
    comma = body.find(",")
    if comma < 0:
        key = body.strip()
        if not key:
            warnings.append(BibWarning(f"@{entry_type}", f"entry at offset {offset} has no citation key"))
            return None, [], warnings
        return key, [], warnings
    key = body[:comma].strip()
    if not key:
        warnings.append(BibWarning(f"@{entry_type}", f"entry at offset {offset} has no citation key"))
        return None, [], warnings

    fields: list[tuple[str, str]] = []
    scanner = _Scanner(body)
    scanner.pos = comma + 1
    while True:
        scanner.skip_ws()
        if scanner.eof():
            break
        name_match = re.match(r"[A-Za-z][A-Za-z0-9_\-]*", body[scanner.pos :])
        if not name_match:
            warnings.append(BibWarning(key, f"unreadable field syntax near offset {offset + scanner.pos}"))
            break
        name = name_match.group(0).lower()
        scanner.pos += name_match.end()
        scanner.skip_ws()
        if scanner.eof() or body[scanner.pos] != "=":
            warnings.append(BibWarning(key, f"field {name!r} missing '='"))
            break
        scanner.pos += 1
        scanner.skip_ws()
        if scanner.eof():
            warnings.append(BibWarning(key, f"field {name!r} has no value"))
            break
        ch = body[scanner.pos]
        try:
            if ch == "{":
                raw = scanner.read_braced()
            elif ch == '"':
                raw = scanner.read_quoted()
            else:
                bare = re.match(r"[^,]*", body[scanner.pos :]).group(0)
                scanner.pos += len(bare)
                raw = bare.strip()
        except BibtexError:
            warnings.append(BibWarning(key, f"field {name!r} value never terminates"))
            break
        fields.append((name, delatex(raw)))
        scanner.skip_ws()
        if not scanner.eof() and body[scanner.pos] == ",":
            scanner.pos += 1
    return key, fields, warnings
