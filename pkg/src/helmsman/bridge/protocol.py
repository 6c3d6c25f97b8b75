"""rosbridge-v2-compatible JSON envelope: parsing and serialization.

One JSON document per text frame. The op determines which optional
fields are required; unknown ops are rejected at a level the server can
answer with a status frame (never a disconnect).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

OPS = frozenset({
    "advertise", "unadvertise", "publish", "subscribe", "unsubscribe",
    "call_service", "service_response", "status",
})

REQUIRED_FIELDS: dict[str, tuple[str, ...]] = {
    "advertise": ("topic", "type"),
    "unadvertise": ("topic",),
    "publish": ("topic", "msg"),
    "subscribe": ("topic",),
    "unsubscribe": ("topic",),
    "call_service": ("service",),
    "service_response": ("service", "values", "result", "id"),
    "status": ("level", "msg"),
}

STATUS_LEVELS = ("none", "error", "warning", "info")


class ProtocolError(Exception):
    def __init__(self, reason: str, frame_id: str | None = None):
        super().__init__(reason)
        self.reason = reason
        self.frame_id = frame_id


_FIELDS = ("op", "topic", "service", "type", "msg", "args", "values", "result",
           "id", "throttle_rate", "queue_length", "level")


@dataclass
class BridgeOp:
    op: str
    topic: str | None = None
    service: str | None = None
    type: str | None = None
    msg: Any = None
    args: Any = None
    values: Any = None
    result: bool | None = None
    id: str | None = None
    throttle_rate: int | None = None
    queue_length: int | None = None
    level: str | None = None

    def to_dict(self) -> dict:
        out = {}
        for name in _FIELDS:
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        return out

    def serialize(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))


def _frame_id(doc: Any) -> str | None:
    if isinstance(doc, dict) and isinstance(doc.get("id"), (str, int)):
        return doc["id"]
    return None


def parse_frame(raw: str) -> BridgeOp:
    try:
        doc = json.loads(raw)
    except (ValueError, TypeError) as exc:
        raise ProtocolError(f"parse: invalid JSON ({exc})") from exc
    return parse_document(doc)


def parse_document(doc: Any) -> BridgeOp:
    if not isinstance(doc, dict):
        raise ProtocolError("parse: frame must be a JSON object", _frame_id(doc))
    op = doc.get("op")
    frame_id = _frame_id(doc)
    if not isinstance(op, str):
        raise ProtocolError("missing or non-string 'op'", frame_id)
    if op not in OPS:
        raise ProtocolError(f"unknown op {op!r}", frame_id)
    missing = [f for f in REQUIRED_FIELDS[op] if f not in doc]
    if missing:
        raise ProtocolError(f"op {op!r} missing fields {missing}", frame_id)
    for name in ("topic", "service", "type"):
        if name in doc and not isinstance(doc[name], str):
            raise ProtocolError(f"{name!r} must be a string", frame_id)
    for name in ("throttle_rate", "queue_length"):
        if name in doc:
            value = doc[name]
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise ProtocolError(f"{name!r} must be an integer >= 0", frame_id)
    if "result" in doc and not isinstance(doc["result"], bool):
        raise ProtocolError("'result' must be a boolean", frame_id)
    if op == "status" and doc["level"] not in STATUS_LEVELS:
        raise ProtocolError(f"unknown status level {doc['level']!r}", frame_id)
    if "id" in doc and not isinstance(doc["id"], (str, int)):
        raise ProtocolError("'id' must be a string or integer", frame_id)
    return BridgeOp(**{name: doc.get(name) for name in _FIELDS})


def status_frame(level: str, msg: str, frame_id: str | None = None) -> BridgeOp:
    return BridgeOp(op="status", level=level, msg=msg, id=frame_id)
