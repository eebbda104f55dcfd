"""Email corpus ingestion.

Loads raw email corpora from a maildir-style directory tree or a CSV file
(header row ``file,message``) and produces cleaned message bodies: the
RFC-822-ish header block is removed, quoted-reply lines are dropped, and
anything below a forward/reply marker is truncated.
"""

from __future__ import annotations

import csv
import re
import sys
from dataclasses import dataclass
from enum import Enum
from pathlib import Path


class EmptyMessage(ValueError):
    """No body text remains after header removal and cleaning."""


class CsvSchemaError(ValueError):
    """CSV corpus file lacks the expected ``file,message`` header columns."""


@dataclass(frozen=True)
class EmailMessage:
    """One parsed corpus unit: an opaque id plus the cleaned body text."""

    id: str
    body: str
    source_path: str = ""


class CorpusFormat(str, Enum):
    MAILDIR_TREE = "maildir_tree"
    CSV = "csv"


@dataclass(frozen=True)
class CorpusSpec:
    """Where a corpus lives and how to read it."""

    root: Path
    format: CorpusFormat
    limit: int | None = None

    def __post_init__(self) -> None:
        if self.limit is not None and self.limit <= 0:
            raise ValueError(f"limit must be positive, got {self.limit}")


# A header line looks like "Name: value". Continuation lines (leading
# whitespace) sit between header lines and are consumed with the block.
_HEADER_START = re.compile(r"^[A-Za-z][A-Za-z0-9-]*:")
_MESSAGE_ID = re.compile(r"^Message-ID:\s*(\S.*?)\s*$", re.IGNORECASE | re.MULTILINE)

# Everything at or below one of these markers is quoted history, not the
# author's text. Matched against whitespace-stripped lines.
_REPLY_MARKERS = ("-----Original Message-----", "----- Forwarded by")


def strip_reply_noise(body: str) -> str:
    """Drop quoted-reply lines and forwarded history from a body.

    Lines starting with ``>`` are removed, the text is truncated at the first
    forward/reply marker, and runs of blank lines collapse to one. May return
    an empty string.
    """
    kept: list[str] = []
    for line in body.splitlines():
        stripped = line.strip()
        if any(stripped.startswith(m) for m in _REPLY_MARKERS):
            break
        if line.startswith(">"):
            continue
        kept.append(line.rstrip())

    collapsed: list[str] = []
    for line in kept:
        if not line and collapsed and not collapsed[-1]:
            continue
        collapsed.append(line)
    while collapsed and not collapsed[0]:
        collapsed.pop(0)
    while collapsed and not collapsed[-1]:
        collapsed.pop()
    return "\n".join(collapsed)


def _split_header_block(text: str) -> tuple[str, str]:
    """Split raw message text into (header_block, body).

    The header block is everything up to the first blank line, provided the
    text actually starts with a ``Name: value`` line; plain text with no
    headers comes back untouched as the body. Continuation lines are part of
    the block by construction (they precede the blank line).
    """
    lines = text.splitlines()
    if not lines or not _HEADER_START.match(lines[0]):
        return "", text
    for i, line in enumerate(lines):
        if not line.strip():
            return "\n".join(lines[:i]), "\n".join(lines[i + 1 :])
    return text, ""


def parse_email(raw: bytes, source: str = "") -> EmailMessage:
    """Parse one raw message into a cleaned :class:`EmailMessage`.

    Invalid UTF-8 bytes are replaced rather than rejected; losing a character
    beats losing a message. Raises :class:`EmptyMessage` when nothing is left
    after cleaning.
    """
    text = raw.decode("utf-8", errors="replace")
    headers, body = _split_header_block(text)
    body = strip_reply_noise(body)
    if not body.strip():
        raise EmptyMessage(f"no body text after cleaning ({source or 'in-memory'})")

    msg_id = source
    if not msg_id:
        m = _MESSAGE_ID.search(headers)
        msg_id = m.group(1) if m else "<unnamed>"
    return EmailMessage(id=msg_id, body=body, source_path=source)


def _iter_maildir(spec: CorpusSpec) -> "list[EmailMessage]":
    paths = sorted(str(p) for p in spec.root.rglob("*") if p.is_file())
    out: list[EmailMessage] = []
    for path in paths:
        if spec.limit is not None and len(out) >= spec.limit:
            break
        raw = Path(path).read_bytes()
        try:
            out.append(parse_email(raw, source=path))
        except EmptyMessage:
            continue
    return out


def _iter_csv(spec: CorpusSpec) -> "list[EmailMessage]":
    # Raw messages can be multi-megabyte cells.
    limit = sys.maxsize
    while True:
        try:
            csv.field_size_limit(limit)
            break
        except OverflowError:
            limit //= 10

    out: list[EmailMessage] = []
    with open(spec.root, newline="", encoding="utf-8", errors="replace") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        if "file" not in fields or "message" not in fields:
            raise CsvSchemaError(
                f"{spec.root}: expected columns 'file' and 'message', got {fields}"
            )
        for row in reader:
            if spec.limit is not None and len(out) >= spec.limit:
                break
            try:
                msg = parse_email(
                    (row["message"] or "").encode("utf-8"), source=row["file"]
                )
            except EmptyMessage:
                continue
            out.append(msg)
    return out


def load_corpus(spec: CorpusSpec) -> list[EmailMessage]:
    """Load a corpus in deterministic order.

    Maildir trees are traversed in lexicographic path order; CSV rows keep
    file order. Messages that clean down to nothing are skipped. ``limit``
    bounds the number of messages returned.
    """
    if not spec.root.exists():
        raise FileNotFoundError(2, "corpus root does not exist", str(spec.root))
    if spec.format is CorpusFormat.MAILDIR_TREE:
        return _iter_maildir(spec)
    return _iter_csv(spec)
