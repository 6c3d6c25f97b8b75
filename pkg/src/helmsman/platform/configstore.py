"""CSV-backed system and process configuration.

The declared parameter list (section, key, display name, default,
optional kind) is the schema; the CSV file holds current values and is
rewritten atomically on every change. Configurable nodes re-query after
a change notification.
"""

from __future__ import annotations

import csv
import io
import threading
from dataclasses import dataclass
from pathlib import Path

from helmsman.platform.auth import PlatformError, _atomic_write

CSV_HEADER = ["section", "key", "display_name", "default", "value"]
CONFIG_CHANGED_TOPIC = "/ui/config_changed"

KINDS = ("string", "number", "bool")


class UnknownParam(PlatformError):
    pass


class ParseError(PlatformError):
    pass


@dataclass
class ConfigParam:
    section: str
    key: str
    display_name: str
    default: str
    value: str
    kind: str = "string"

    def to_dict(self) -> dict:
        return {"section": self.section, "key": self.key,
                "display_name": self.display_name, "default": self.default,
                "value": self.value}


def _check_kind(kind: str, value: str) -> None:
    if kind == "number":
        try:
            float(value)
        except ValueError as exc:
            raise ParseError(f"not a number: {value!r}") from exc
    elif kind == "bool":
        if value.lower() not in ("true", "false"):
            raise ParseError(f"not a bool: {value!r}")


class ConfigStore:
    def __init__(self, csv_path: str | Path, declared: list[dict]):
        self._path = Path(csv_path)
        self._lock = threading.Lock()
        self._params: dict[tuple[str, str], ConfigParam] = {}
        self._order: list[tuple[str, str]] = []
        for d in declared:
            key = (d["section"], d["key"])
            if key in self._params:
                raise ValueError(f"duplicate config param {key}")
            kind = d.get("kind", "string")
            if kind not in KINDS:
                raise ValueError(f"param {key}: unknown kind {kind!r}")
            default = str(d.get("default", ""))
            self._params[key] = ConfigParam(
                section=d["section"], key=d["key"],
                display_name=d.get("display_name", d["key"]),
                default=default, value=default, kind=kind)
            self._order.append(key)
        self._bus = None
        self._node = "platform_config"
        self._load_or_init()

    def _load_or_init(self) -> None:
        if not self._path.exists():
            self._write()
            return
        with open(self._path, newline="", encoding="utf-8") as f:
            for row in csv.DictReader(f):
                key = (row.get("section", ""), row.get("key", ""))
                param = self._params.get(key)
                if param is not None and row.get("value") is not None:
                    param.value = row["value"]

    def _render(self) -> bytes:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for key in self._order:
            p = self._params[key]
            writer.writerow([p.section, p.key, p.display_name, p.default, p.value])
        return out.getvalue().encode("utf-8")

    def _write(self) -> None:
        _atomic_write(self._path, self._render())

    # -- operations -------------------------------------------------------

    def get(self) -> list[dict]:
        with self._lock:
            return [self._params[key].to_dict() for key in self._order]

    def set(self, changes: list[dict]) -> list[dict]:
        """Apply value changes and rewrite the CSV atomically."""
        with self._lock:
            staged: list[tuple[ConfigParam, str]] = []
            for change in changes:
                key = (change.get("section", ""), change.get("key", ""))
                param = self._params.get(key)
                if param is None:
                    raise UnknownParam(f"{key[0]}/{key[1]}")
                value = str(change["value"])
                _check_kind(param.kind, value)
                staged.append((param, value))
            for param, value in staged:
                param.value = value
            self._write()
            table = [self._params[key].to_dict() for key in self._order]
        self._notify_changed()
        return table

    def value(self, section: str, key: str) -> str:
        with self._lock:
            param = self._params.get((section, key))
            if param is None:
                raise UnknownParam(f"{section}/{key}")
            return param.value

    def _notify_changed(self) -> None:
        if self._bus is not None:
            self._bus.publish(self._node, CONFIG_CHANGED_TOPIC, {"changed": True})

    # -- bus wiring ---------------------------------------------------------

    def attach(self, bus, auth=None, node: str = "platform_config") -> None:
        self._bus = bus
        self._node = node
        bus.register_node(node)
        bus.advertise(node, CONFIG_CHANGED_TOPIC, "ui/ConfigChanged")
        bus.register_service(node, "/ui/get_config",
                             lambda req: {"params": self.get()})

        def svc_set(req):
            if auth is not None:
                auth.require_role(req.get("token"), "administrator")
            return {"params": self.set(req.get("changes", []))}

        bus.register_service(node, "/ui/set_config", svc_set)
