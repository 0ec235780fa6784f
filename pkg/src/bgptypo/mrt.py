"""Minimal MRT TABLE_DUMP_V2 reader (IPv4 unicast RIBs only).

Registered as the ``mrt`` snapshot adapter. Records other than
PEER_INDEX_TABLE and RIB_IPV4_UNICAST are skipped.
"""
from __future__ import annotations

import logging
import struct
from typing import BinaryIO

from .exceptions import CorruptInputError
from .paths import AsPath, Prefix, RouteEntry, token

log = logging.getLogger(__name__)

TABLE_DUMP_V2 = 13
PEER_INDEX_TABLE = 1
RIB_IPV4_UNICAST = 2

ATTR_AS_PATH = 2
AS_SET = 1
AS_SEQUENCE = 2

_HEADER = struct.Struct("!IHHI")


def _records(stream: BinaryIO):
    while True:
        head = stream.read(_HEADER.size)
        if not head:
            return
        if len(head) < _HEADER.size:
            raise CorruptInputError("truncated MRT header")
        ts, mtype, subtype, length = _HEADER.unpack(head)
        body = stream.read(length)
        if len(body) < length:
            raise CorruptInputError("truncated MRT record")
        yield ts, mtype, subtype, body


def _parse_peer_index(body: bytes):
    off = 4
    (name_len,) = struct.unpack_from("!H", body, off)
    off += 2
    view = body[off:off + name_len].decode("utf-8", "replace")
    off += name_len
    (count,) = struct.unpack_from("!H", body, off)
    off += 2
    peers = []
    for _ in range(count):
        ptype = body[off]
        off += 1 + 4
        off += 16 if ptype & 0x01 else 4
        if ptype & 0x02:
            (asn,) = struct.unpack_from("!I", body, off)
            off += 4
        else:
            (asn,) = struct.unpack_from("!H", body, off)
            off += 2
        peers.append(asn)
    return view, peers


def _parse_as_path(data: bytes) -> AsPath:
    tokens = []
    raw = []
    has_set = False
    off = 0
    while off < len(data):
        seg_type, seg_len = data[off], data[off + 1]
        off += 2
        asns = struct.unpack_from(f"!{seg_len}I", data, off)
        off += 4 * seg_len
        if seg_type == AS_SET:
            has_set = True
            raw.append("{" + ",".join(map(str, asns)) + "}")
        else:
            for a in asns:
                tokens.append(token(a))
                raw.append(str(a))
    if has_set:
        return AsPath(tuple(tokens), True, " ".join(raw))
    return AsPath(tuple(tokens))


def _find_as_path(attrs: bytes) -> AsPath | None:
    off = 0
    while off < len(attrs):
        flags, atype = attrs[off], attrs[off + 1]
        off += 2
        if flags & 0x10:
            (alen,) = struct.unpack_from("!H", attrs, off)
            off += 2
        else:
            alen = attrs[off]
            off += 1
        if atype == ATTR_AS_PATH:
            return _parse_as_path(attrs[off:off + alen])
        off += alen
    return None


def read_table_dump_v2(stream: BinaryIO, max_error_rate: float = 0.01, collector: str | None = None):
    """Return ``(entries, skipped)`` from a TABLE_DUMP_V2 byte stream."""
    peers: list[int] = []
    entries: list[RouteEntry] = []
    skipped = 0
    name = collector
    for ts, mtype, subtype, body in _records(stream):
        if mtype != TABLE_DUMP_V2:
            continue
        if subtype == PEER_INDEX_TABLE:
            view, peers = _parse_peer_index(body)
            if name is None:
                name = view or "mrt"
            continue
        if subtype != RIB_IPV4_UNICAST:
            continue
        try:
            off = 4
            plen = body[off]
            off += 1
            nbytes = (plen + 7) // 8
            net = int.from_bytes(body[off:off + nbytes].ljust(4, b"\0"), "big")
            off += nbytes
            prefix = Prefix(net, plen)
            (count,) = struct.unpack_from("!H", body, off)
            off += 2
        except (IndexError, struct.error, ValueError) as exc:
            skipped += 1
            log.debug("bad RIB record: %s", exc)
            continue
        for _ in range(count):
            try:
                peer_idx, orig_ts, alen = struct.unpack_from("!HIH", body, off)
                off += 8
                attrs = body[off:off + alen]
                off += alen
                path = _find_as_path(attrs)
                if path is None or not path.tokens:
                    raise ValueError("missing AS_PATH")
                entries.append(
                    RouteEntry(orig_ts, name or "mrt", token(peers[peer_idx]), prefix, path)
                )
            except (IndexError, struct.error, ValueError) as exc:
                skipped += 1
                log.debug("bad RIB entry: %s", exc)
    total = len(entries) + skipped
    if total >= 100 and skipped / total > max_error_rate:
        raise CorruptInputError(f"{skipped} of {total} MRT entries malformed")
    return entries, skipped


def write_table_dump_v2(entries, view: str = "", timestamp: int = 0) -> bytes:
    """Encode entries as TABLE_DUMP_V2 (used for fixtures and round trips)."""
    peers: list[int] = []
    index: dict[int, int] = {}
    for e in entries:
        if e.peer_asn.value not in index:
            index[e.peer_asn.value] = len(peers)
            peers.append(e.peer_asn.value)

    def record(subtype, body):
        return _HEADER.pack(timestamp, TABLE_DUMP_V2, subtype, len(body)) + body

    vb = view.encode()
    body = struct.pack("!IH", 0, len(vb)) + vb + struct.pack("!H", len(peers))
    for asn in peers:
        body += struct.pack("!BII", 0x02, 0, 0) + struct.pack("!I", asn)
    out = [record(PEER_INDEX_TABLE, body)]

    for seq, e in enumerate(entries):
        if e.path.contains_as_set:
            raise ValueError("AS_SET paths are not encoded")
        asns = [t.value for t in e.path.tokens]
        seg = b""
        for i in range(0, len(asns), 255):
            chunk = asns[i:i + 255]
            seg += struct.pack(f"!BB{len(chunk)}I", AS_SEQUENCE, len(chunk), *chunk)
        attr = struct.pack("!BBH", 0x50, ATTR_AS_PATH, len(seg)) + seg
        nbytes = (e.prefix.length + 7) // 8
        pfx = e.prefix.network.to_bytes(4, "big")[:nbytes]
        body = struct.pack("!IB", seq, e.prefix.length) + pfx + struct.pack("!H", 1)
        body += struct.pack("!HIH", index[e.peer_asn.value], e.timestamp, len(attr)) + attr
        out.append(record(RIB_IPV4_UNICAST, body))
    return b"".join(out)
