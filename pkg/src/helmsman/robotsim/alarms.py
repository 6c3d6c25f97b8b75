"""System safety alarms.

An alarm is *active* while its condition is still detected (resetting
would bring it right back, so reset never removes it) and *inactive*
once the condition cleared but safety has not been reset yet.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

ALARMS_TOPIC = "/safety/alarms"
RESET_TOPIC = "/safety/reset"
RESET_ACK_TOPIC = "/safety/reset_ack"
REQUEST_UPDATE_TOPIC = "/safety/request_update"

ACTIVE = "active"
INACTIVE = "inactive"


class UnknownAlarm(Exception):
    pass


@dataclass
class Alarm:
    id: str
    text: str
    status: str
    raised_at: float

    def to_dict(self) -> dict:
        return {"id": self.id, "text": self.text, "status": self.status,
                "raised_at": self.raised_at}


class AlarmManager:
    def __init__(self, clock, on_change=None):
        self._clock = clock
        self._on_change = on_change
        self._lock = threading.Lock()
        self._alarms: dict[str, Alarm] = {}
        self._bus = None
        self._node = "safety"

    def attach(self, bus, node: str = "safety"):
        self._bus = bus
        self._node = node
        bus.register_node(node)
        bus.register_type("safety/AlarmList", ["alarms"])
        bus.advertise(node, ALARMS_TOPIC, "safety/AlarmList")
        bus.advertise(node, RESET_ACK_TOPIC, "safety/ResetAck")
        bus.subscribe(node, RESET_TOPIC, lambda msg: self.reset())
        bus.subscribe(node, REQUEST_UPDATE_TOPIC, lambda msg: self._notify())

    def raise_alarm(self, alarm_id: str, text: str = "") -> None:
        """Insert or re-activate; idempotent on id (refreshes raised_at)."""
        with self._lock:
            now = self._clock.now_ms()
            existing = self._alarms.get(alarm_id)
            if existing is None:
                self._alarms[alarm_id] = Alarm(alarm_id, text, ACTIVE, now)
            else:
                existing.status = ACTIVE
                existing.raised_at = now
                if text:
                    existing.text = text
        self._notify()

    def clear_condition(self, alarm_id: str) -> None:
        with self._lock:
            alarm = self._alarms.get(alarm_id)
            if alarm is None:
                raise UnknownAlarm(alarm_id)
            changed = alarm.status == ACTIVE
            alarm.status = INACTIVE
        if changed:
            self._notify()

    def reset(self) -> list[dict]:
        """Remove inactive alarms; active ones would re-appear, so they stay."""
        with self._lock:
            before = len(self._alarms)
            self._alarms = {k: a for k, a in self._alarms.items() if a.status == ACTIVE}
            removed = before - len(self._alarms)
            remaining = [a.to_dict() for a in self._alarms.values()]
        if removed:
            self._notify()
        if self._bus is not None:
            self._bus.publish(self._node, RESET_ACK_TOPIC,
                              {"removed": removed, "remaining": remaining})
        return remaining

    def snapshot(self) -> list[dict]:
        with self._lock:
            return [a.to_dict() for a in self._alarms.values()]

    def any_active(self) -> bool:
        with self._lock:
            return any(a.status == ACTIVE for a in self._alarms.values())

    def _notify(self):
        alarms = self.snapshot()
        active = any(a["status"] == ACTIVE for a in alarms)
        if self._bus is not None:
            self._bus.publish(self._node, ALARMS_TOPIC,
                              {"alarms": alarms, "safety_ok": not active})
        if self._on_change is not None:
            self._on_change(alarms, active)
