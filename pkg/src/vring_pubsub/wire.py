"""Little-endian wire encoding of SUB and PUB messages.

SUB = [type:1][r:2][|C_S|:1][channel:1]*[|P|:1][position:2]*
PUB = [type:1][goal:2][ep:2][c:1][seq:4][origin:2][len:2][data]
"""

from __future__ import annotations

import struct

from .pubsub import PubMeta, PubMsg, SubMsg

SUB_TYPE = 1
PUB_TYPE = 2
NONE_ID = 0xFFFF

_PUB_HEAD = struct.Struct("<BHHBIHH")


class WireError(ValueError):
    pass


def encode_sub(msg: SubMsg) -> bytes:
    chans = sorted(msg.channels)
    if len(chans) > 255 or len(msg.positions) > 255:
        raise WireError("too many channels or positions for one SUB")
    r = NONE_ID if msg.r is None else msg.r
    return (struct.pack("<BHB", SUB_TYPE, r, len(chans)) + bytes(chans)
            + struct.pack(f"<B{len(msg.positions)}H", len(msg.positions), *msg.positions))


def decode_sub(buf: bytes) -> SubMsg:
    try:
        kind, r, nc = struct.unpack_from("<BHB", buf, 0)
        if kind != SUB_TYPE:
            raise WireError(f"not a SUB (type {kind})")
        off = 4
        chans = frozenset(buf[off:off + nc])
        off += nc
        (npos,) = struct.unpack_from("<B", buf, off)
        positions = struct.unpack_from(f"<{npos}H", buf, off + 1)
    except struct.error as exc:
        raise WireError(str(exc)) from exc
    if off + 1 + 2 * npos != len(buf):
        raise WireError("trailing bytes after SUB")
    return SubMsg(None if r == NONE_ID else r, chans, tuple(positions))


def encode_pub(msg: PubMsg) -> bytes:
    return _PUB_HEAD.pack(PUB_TYPE, msg.goal, msg.ep, msg.channel, msg.meta.seq,
                          msg.meta.origin, len(msg.data)) + bytes(msg.data)


def decode_pub(buf: bytes) -> PubMsg:
    try:
        kind, goal, ep, c, seq, origin, n = _PUB_HEAD.unpack_from(buf, 0)
    except struct.error as exc:
        raise WireError(str(exc)) from exc
    if kind != PUB_TYPE:
        raise WireError(f"not a PUB (type {kind})")
    data = bytes(buf[_PUB_HEAD.size:])
    if len(data) != n:
        raise WireError(f"payload length {len(data)} != header {n}")
    return PubMsg(goal, ep, c, data, PubMeta(origin, seq))


def sub_size(msg: SubMsg) -> int:
    return 5 + len(msg.channels) + 2 * len(msg.positions)


def pub_size(msg: PubMsg) -> int:
    return _PUB_HEAD.size + len(msg.data)
