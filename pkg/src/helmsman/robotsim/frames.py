"""Tiny stdlib-only PNG encoder for synthetic camera frames.

Frames are 8-bit grayscale with a scrolling gradient and a bright bar
whose position tracks the frame counter, so streams are visibly "live"
in a browser. Frame metadata (counter, robot pose) rides in a tEXt
chunk that tests can decode without an image library.
"""

from __future__ import annotations

import json
import struct
import zlib

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
METADATA_KEYWORD = b"comment"


def _chunk(chunk_type: bytes, data: bytes) -> bytes:
    return (
        struct.pack(">I", len(data))
        + chunk_type
        + data
        + struct.pack(">I", zlib.crc32(chunk_type + data) & 0xFFFFFFFF)
    )


def encode_png(width: int, height: int, rows: list[bytes], metadata: dict | None = None) -> bytes:
    """Encode grayscale rows (each ``width`` bytes) into a PNG."""
    if len(rows) != height or any(len(r) != width for r in rows):
        raise ValueError("rows must be height x width bytes")
    ihdr = struct.pack(">IIBBBBB", width, height, 8, 0, 0, 0, 0)
    raw = b"".join(b"\x00" + row for row in rows)
    out = [PNG_SIGNATURE, _chunk(b"IHDR", ihdr)]
    if metadata is not None:
        text = METADATA_KEYWORD + b"\x00" + json.dumps(metadata).encode("latin-1")
        out.append(_chunk(b"tEXt", text))
    out.append(_chunk(b"IDAT", zlib.compress(raw, 6)))
    out.append(_chunk(b"IEND", b""))
    return b"".join(out)


def decode_metadata(png: bytes) -> dict | None:
    """Read back the JSON metadata from the tEXt chunk, if present."""
    if not png.startswith(PNG_SIGNATURE):
        raise ValueError("not a PNG")
    offset = len(PNG_SIGNATURE)
    while offset + 8 <= len(png):
        length = struct.unpack(">I", png[offset:offset + 4])[0]
        chunk_type = png[offset + 4:offset + 8]
        data = png[offset + 8:offset + 8 + length]
        if chunk_type == b"tEXt":
            keyword, _, text = data.partition(b"\x00")
            if keyword == METADATA_KEYWORD:
                return json.loads(text.decode("latin-1"))
        if chunk_type == b"IEND":
            break
        offset += 12 + length
    return None


def decode_size(png: bytes) -> tuple[int, int]:
    if not png.startswith(PNG_SIGNATURE) or png[12:16] != b"IHDR":
        raise ValueError("not a PNG")
    width, height = struct.unpack(">II", png[16:24])
    return width, height


def render_frame(frame_id: int, width: int = 160, height: int = 120,
                 pose: dict | None = None) -> bytes:
    bar = frame_id % width
    rows = []
    for y in range(height):
        row = bytearray((x + y + 3 * frame_id) % 200 for x in range(width))
        row[bar] = 255
        rows.append(bytes(row))
    metadata = {"frame_id": frame_id}
    if pose is not None:
        metadata["pose"] = pose
    return encode_png(width, height, rows, metadata)
