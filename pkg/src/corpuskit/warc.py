"""Streaming WARC 1.0/1.1 reading and writing.

The reader processes one record at a time (memory bounded by the largest
single record, not the archive), accepts gzip-per-record archives, skips
records with malformed headers while counting them, and raises
TruncatedArchiveError when the stream ends mid-record — after every
complete record has been yielded.
"""

from __future__ import annotations

import gzip
import io
import logging
import uuid
import zlib
from dataclasses import dataclass, field
from typing import BinaryIO, Iterator, Optional

from .errors import TruncatedArchiveError

logger = logging.getLogger(__name__)

_GZIP_MAGIC = b"\x1f\x8b"
_CHUNK = 64 * 1024
_MAX_HEADER_BLOCK = 64 * 1024


@dataclass
class WarcRecord:
    headers: dict[str, str]
    payload: bytes

    @property
    def record_type(self) -> str:
        return self.headers.get("WARC-Type", "").lower()


@dataclass
class ReaderStats:
    records_yielded: int = 0
    records_skipped: int = 0
    members_skipped: int = 0
    warnings: list[str] = field(default_factory=list)

    def warn(self, message: str) -> None:
        self.warnings.append(message)
        logger.warning("%s", message)


class _ByteFeed:
    """Buffered incremental reader over a binary stream."""

    def __init__(self, stream: BinaryIO):
        self._stream = stream
        self._buffer = bytearray()
        self._eof = False

    def _fill(self, target: int) -> None:
        while not self._eof and len(self._buffer) < target:
            chunk = self._stream.read(_CHUNK)
            if not chunk:
                self._eof = True
                break
            self._buffer.extend(chunk)

    def peek(self, n: int) -> bytes:
        self._fill(n)
        return bytes(self._buffer[:n])

    def read(self, n: int) -> bytes:
        self._fill(n)
        out = bytes(self._buffer[:n])
        del self._buffer[:n]
        return out

    def read_until(self, delim: bytes, limit: int) -> Optional[bytes]:
        """Bytes up to and including delim, or None if absent within limit."""
        search_from = 0
        while True:
            idx = self._buffer.find(delim, search_from)
            if idx != -1:
                end = idx + len(delim)
                out = bytes(self._buffer[:end])
                del self._buffer[:end]
                return out
            if self._eof or len(self._buffer) >= limit:
                return None
            search_from = max(0, len(self._buffer) - len(delim) + 1)
            self._fill(len(self._buffer) + _CHUNK)

    def skip_leading_newlines(self) -> None:
        while True:
            head = self.peek(1)
            if head in (b"\r", b"\n") and head:
                self.read(1)
            else:
                return

    def at_eof(self) -> bool:
        self._fill(1)
        return self._eof and not self._buffer

    def push_back(self, data: bytes) -> None:
        self._buffer[:0] = data

    def resync_to_magic(self, magic: bytes) -> bool:
        """Drop bytes until magic starts the buffer; False if never found."""
        while True:
            idx = self._buffer.find(magic)
            if idx != -1:
                del self._buffer[:idx]
                return True
            if self._eof:
                self._buffer.clear()
                return False
            keep = len(magic) - 1
            if len(self._buffer) > keep:
                del self._buffer[: len(self._buffer) - keep]
            self._fill(len(self._buffer) + _CHUNK)


def _parse_header_block(block: bytes) -> Optional[dict[str, str]]:
    lines = block.decode("utf-8", errors="replace").splitlines()
    lines = [l for l in lines if l]
    if not lines or not lines[0].startswith("WARC/1."):
        return None
    headers: dict[str, str] = {}
    for line in lines[1:]:
        if ":" not in line:
            return None
        name, _, value = line.partition(":")
        headers[name.strip()] = value.strip()
    return headers


def _read_records_plain(feed: _ByteFeed, stats: ReaderStats) -> Iterator[WarcRecord]:
    while True:
        feed.skip_leading_newlines()
        if feed.at_eof():
            return
        head = feed.peek(5)
        if head != b"WARC/":
            stats.records_skipped += 1
            stats.warn("malformed record header; resyncing to next record")
            feed.read(1)
            if not feed.resync_to_magic(b"WARC/"):
                return
            continue
        block = feed.read_until(b"\r\n\r\n", _MAX_HEADER_BLOCK)
        if block is None:
            raise TruncatedArchiveError("stream ended inside a record header block")
        headers = _parse_header_block(block)
        if headers is None or "Content-Length" not in headers:
            stats.records_skipped += 1
            stats.warn("unparseable record header; resyncing to next record")
            if not feed.resync_to_magic(b"WARC/"):
                return
            continue
        try:
            length = int(headers["Content-Length"])
        except ValueError:
            stats.records_skipped += 1
            stats.warn("bad Content-Length; resyncing to next record")
            if not feed.resync_to_magic(b"WARC/"):
                return
            continue
        payload = feed.read(length)
        if len(payload) < length:
            raise TruncatedArchiveError(
                f"stream ended inside a record payload ({len(payload)}/{length} bytes)"
            )
        yield WarcRecord(headers=headers, payload=payload)


_GZIP_MEMBER_MAGIC = b"\x1f\x8b\x08"


def _gzip_members(stream: BinaryIO, stats: ReaderStats) -> Iterator[bytes]:
    """Decompress a concatenation of gzip members one member at a time."""
    feed = _ByteFeed(stream)
    while not feed.at_eof():
        if feed.peek(2) != _GZIP_MAGIC:
            if not feed.resync_to_magic(_GZIP_MEMBER_MAGIC):
                return
        decomp = zlib.decompressobj(wbits=31)
        out = bytearray()
        fed = bytearray()  # raw bytes handed to zlib, for resync after corruption
        failed = False
        while True:
            chunk = feed.read(_CHUNK)
            if not chunk:
                if not decomp.eof:
                    raise TruncatedArchiveError("gzip member truncated")
                break
            fed.extend(chunk)
            try:
                out.extend(decomp.decompress(chunk))
            except zlib.error:
                failed = True
                break
            if decomp.eof:
                # push back bytes belonging to the next member
                leftover = decomp.unused_data
                if leftover:
                    feed.push_back(leftover)
                break
        if failed:
            stats.members_skipped += 1
            stats.warn("corrupt gzip member; skipping to next member")
            # fed bytes were consumed by zlib before the failure surfaced;
            # hunt for the next member start inside them
            next_start = fed.find(_GZIP_MEMBER_MAGIC, 1)
            if next_start != -1:
                feed.push_back(fed[next_start:])
            elif not feed.resync_to_magic(_GZIP_MEMBER_MAGIC):
                return
            continue
        yield bytes(out)


def read_warc(stream: BinaryIO, stats: Optional[ReaderStats] = None) -> Iterator[WarcRecord]:
    """Iterate records from a WARC stream, plain or gzip-per-record."""
    stats = stats if stats is not None else ReaderStats()
    feed = _ByteFeed(stream)
    if feed.peek(2) == _GZIP_MAGIC:
        # Re-feed: members already buffered inside feed
        member_stream = _RebufferedStream(feed)
        for member in _gzip_members(member_stream, stats):
            yield from _read_records_plain(_ByteFeed(io.BytesIO(member)), stats)
    else:
        yield from _read_records_plain(feed, stats)


class _RebufferedStream:
    """File-like view over a _ByteFeed so buffered bytes are not lost."""

    def __init__(self, feed: _ByteFeed):
        self._feed = feed

    def read(self, n: int) -> bytes:
        return self._feed.read(n)


def split_http_payload(payload: bytes) -> tuple[dict[str, str], bytes]:
    """Split an HTTP response payload into (headers, body).

    Non-HTTP payloads come back with empty headers and the payload as body.
    """
    if not payload.startswith(b"HTTP/"):
        return {}, payload
    for sep in (b"\r\n\r\n", b"\n\n"):
        idx = payload.find(sep)
        if idx != -1:
            head, body = payload[:idx], payload[idx + len(sep) :]
            break
    else:
        return {}, payload
    headers: dict[str, str] = {}
    for line in head.decode("latin-1").splitlines()[1:]:
        if ":" in line:
            name, _, value = line.partition(":")
            headers[name.strip().lower()] = value.strip()
    return headers, body


def build_record_bytes(
    record_type: str,
    target_url: str,
    payload: bytes,
    *,
    date: str = "2024-01-01T00:00:00Z",
    content_type: str = "application/http;msgtype=response",
    record_id: Optional[str] = None,
    version: str = "1.1",
    extra_headers: Optional[dict[str, str]] = None,
) -> bytes:
    """Serialize one WARC record."""
    rid = record_id or f"<urn:uuid:{uuid.uuid4()}>"
    headers = [
        f"WARC/{version}",
        f"WARC-Type: {record_type}",
        f"WARC-Record-ID: {rid}",
        f"WARC-Date: {date}",
        f"WARC-Target-URI: {target_url}",
        f"Content-Type: {content_type}",
        f"Content-Length: {len(payload)}",
    ]
    for name, value in (extra_headers or {}).items():
        headers.append(f"{name}: {value}")
    head = "\r\n".join(headers).encode("utf-8") + b"\r\n\r\n"
    return head + payload + b"\r\n\r\n"


def build_http_response(body: bytes, content_type: str = "text/html; charset=utf-8") -> bytes:
    head = (
        b"HTTP/1.1 200 OK\r\n"
        + f"Content-Type: {content_type}\r\n".encode()
        + f"Content-Length: {len(body)}\r\n".encode()
        + b"\r\n"
    )
    return head + body


def write_warc(path, records: list[bytes], gzip_per_record: bool = True) -> None:
    """Write serialized records to a file, optionally gzip-per-record."""
    with open(path, "wb") as handle:
        for record in records:
            handle.write(gzip.compress(record) if gzip_per_record else record)
