"""Platform operation mode shown in the side menu.

Derived, single source of truth with priority
alarm > running > programming > idle: alarm while any alarm is active,
running while the process executor runs or steps, programming while a
routine recording is open, idle otherwise.
"""

from __future__ import annotations

import threading

IDLE = "idle"
RUNNING = "running"
ALARM = "alarm"
PROGRAMMING = "programming"

OPERATION_MODE_TOPIC = "/ui/operation_mode"

_EXEC_RUNNING = ("running", "stepping")


def derive_mode(alarm_active: bool, exec_mode: str, recording_open: bool) -> str:
    if alarm_active:
        return ALARM
    if exec_mode in _EXEC_RUNNING:
        return RUNNING
    if recording_open:
        return PROGRAMMING
    return IDLE


class OperationModeTracker:
    def __init__(self):
        self._lock = threading.Lock()
        self._alarm_active = False
        self._exec_mode = "idle"
        self._recording_open = False
        self._published: str | None = None
        self._bus = None
        self._node = "platform_mode"

    @property
    def mode(self) -> str:
        with self._lock:
            return derive_mode(self._alarm_active, self._exec_mode,
                               self._recording_open)

    def set_alarm_active(self, flag: bool) -> None:
        self._update(alarm_active=bool(flag))

    def set_exec_mode(self, mode: str) -> None:
        self._update(exec_mode=mode)

    def set_recording_open(self, flag: bool) -> None:
        self._update(recording_open=bool(flag))

    def _update(self, **changes) -> None:
        with self._lock:
            for name, value in changes.items():
                setattr(self, f"_{name}", value)
            mode = derive_mode(self._alarm_active, self._exec_mode,
                               self._recording_open)
            changed = mode != self._published
            self._published = mode
        if changed:
            self._publish(mode)

    def attach(self, bus, node: str = "platform_mode") -> None:
        self._bus = bus
        self._node = node
        bus.register_node(node)
        bus.register_type("ui/OperationMode", ["mode"])
        bus.advertise(node, OPERATION_MODE_TOPIC, "ui/OperationMode")
        bus.register_service(node, "/ui/get_operation_mode",
                             lambda req: {"mode": self.mode})
        with self._lock:
            self._published = None  # force an initial publication
        self._update()

    def _publish(self, mode: str) -> None:
        if self._bus is not None:
            self._bus.publish(self._node, OPERATION_MODE_TOPIC, {"mode": mode})
