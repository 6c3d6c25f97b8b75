"""Dynamic module launching and monitoring.

A module bundles launch units (the in-process stand-in for launch
files); its observed state derives every poll tick from the live node
set, never from assumed request success — someone may be starting or
killing nodes from a terminal at the same time.

States: active (all expected nodes live), inactive (none), transitioning
(launch/stop pending and not settled), incomplete (partially live, or a
pending request timed out).
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field, replace

from helmsman.platform.auth import Forbidden

logger = logging.getLogger(__name__)

ACTIVE = "active"
INACTIVE = "inactive"
TRANSITIONING = "transitioning"
INCOMPLETE = "incomplete"

PENDING_NONE = "none"
PENDING_LAUNCHING = "launching"
PENDING_STOPPING = "stopping"

DEFAULT_TIMEOUT_MS = 15_000.0

MODULE_STATES_TOPIC = "/ui/module_states"
LAUNCH_BUSY_TOPIC = "/ui/launch_busy"
LAUNCH_SERVICE = "/ui/launch_nodes"
STOP_SERVICE = "/ui/stop_nodes"

FAIL_NONE = "none"
FAIL_NEVER_STARTS = "never_starts"
FAIL_DIES_AFTER = "dies_after_ms"


class UnknownUnit(Exception):
    pass


@dataclass
class LaunchUnit:
    id: str
    nodes_started: list[str]
    startup_delay_ms: float = 0.0
    fail_mode: str = FAIL_NONE
    fail_after_ms: float = 0.0

    @classmethod
    def from_dict(cls, d: dict) -> "LaunchUnit":
        return cls(
            id=d["id"],
            nodes_started=list(d["nodes_started"]),
            startup_delay_ms=float(d.get("startup_delay_ms", 0.0)),
            fail_mode=d.get("fail_mode", FAIL_NONE),
            fail_after_ms=float(d.get("fail_after_ms", 0.0)),
        )


@dataclass
class ModuleSpec:
    name: str
    launch_units: list[str]
    expected_nodes: list[str]
    allowed_roles: list[str] = field(default_factory=lambda: ["administrator", "operator"])

    def __post_init__(self):
        if not self.expected_nodes:
            raise ValueError(f"module {self.name}: expected_nodes must be non-empty")
        if not self.launch_units:
            raise ValueError(f"module {self.name}: launch_units must be non-empty")

    @classmethod
    def from_dict(cls, d: dict) -> "ModuleSpec":
        return cls(
            name=d["name"],
            launch_units=list(d["launch_units"]),
            expected_nodes=list(d["expected_nodes"]),
            allowed_roles=list(d.get("allowed_roles", ["administrator", "operator"])),
        )


@dataclass(frozen=True)
class ModuleState:
    value: str = INACTIVE
    pending: str = PENDING_NONE
    pending_since: float = 0.0


def compute_state(spec: ModuleSpec, live: set[str], prev: ModuleState, now: float,
                  timeout_ms: float = DEFAULT_TIMEOUT_MS) -> ModuleState:
    """Pure state derivation from one live-node snapshot.

    A pending launch settles to active when every expected node is live;
    a pending stop settles to inactive when none is. An unsettled request
    shows transitioning until it times out, then the module is reported
    incomplete and the pending flag drops (observation takes over).
    """
    expected = set(spec.expected_nodes)
    alive = len(expected & live)
    total = len(expected)
    elapsed = now - prev.pending_since

    if prev.pending == PENDING_LAUNCHING:
        if alive == total:
            return ModuleState(ACTIVE, PENDING_NONE, 0.0)
        if elapsed > timeout_ms:
            return ModuleState(INCOMPLETE, PENDING_NONE, 0.0)
        return ModuleState(TRANSITIONING, PENDING_LAUNCHING, prev.pending_since)

    if prev.pending == PENDING_STOPPING:
        if alive == 0:
            return ModuleState(INACTIVE, PENDING_NONE, 0.0)
        if elapsed > timeout_ms:
            return ModuleState(INCOMPLETE, PENDING_NONE, 0.0)
        return ModuleState(TRANSITIONING, PENDING_STOPPING, prev.pending_since)

    if alive == total:
        return ModuleState(ACTIVE, PENDING_NONE, 0.0)
    if alive == 0:
        return ModuleState(INACTIVE, PENDING_NONE, 0.0)
    return ModuleState(INCOMPLETE, PENDING_NONE, 0.0)


STATUS_STARTED = "started"
STATUS_ALREADY_LAUNCHED = "already_launched"
STATUS_STOPPED = "stopped"
STATUS_NOT_RUNNING = "not_running"
STATUS_ERROR = "error"


class ModuleManager:
    def __init__(self, bus, clock, modules: list[ModuleSpec], units: list[LaunchUnit],
                 auth=None, timeout_ms: float = DEFAULT_TIMEOUT_MS,
                 poll_interval_ms: float = 1000.0, snapshot_every: int = 10,
                 node: str = "module_manager"):
        self._bus = bus
        self._clock = clock
        self._modules = list(modules)
        self._units = {u.id: u for u in units}
        self._auth = auth
        self._timeout_ms = timeout_ms
        self._poll_interval = poll_interval_ms
        self._snapshot_every = snapshot_every
        self._node = node
        self._lock = threading.Lock()
        self._running_units: set[str] = set()
        self._unit_timers: dict[str, list] = {}
        self._states: dict[str, ModuleState] = {
            m.name: ModuleState() for m in self._modules}
        self._published: dict[str, tuple[str, str]] = {}
        self._busy_published: bool | None = None
        self._tick_count = 0
        self._poll_timer = None
        self._validate()

    def _validate(self):
        owners: dict[str, str] = {}
        for unit in self._units.values():
            for node in unit.nodes_started:
                if node in owners:
                    raise ValueError(
                        f"node {node!r} started by both {owners[node]!r} and {unit.id!r}")
                owners[node] = unit.id
        names = [m.name for m in self._modules]
        if len(names) != len(set(names)):
            raise ValueError("module names must be unique")
        for module in self._modules:
            for unit_id in module.launch_units:
                if unit_id not in self._units:
                    raise ValueError(
                        f"module {module.name}: unknown launch unit {unit_id!r}")

    # -- bus wiring -----------------------------------------------------

    def start(self):
        self._bus.register_node(self._node)
        self._bus.register_type("ui/ModuleStates", ["modules"])
        self._bus.register_type("ui/LaunchBusy", ["busy"])
        self._bus.advertise(self._node, MODULE_STATES_TOPIC, "ui/ModuleStates")
        self._bus.advertise(self._node, LAUNCH_BUSY_TOPIC, "ui/LaunchBusy")
        self._bus.register_service(self._node, LAUNCH_SERVICE, self._svc_launch)
        self._bus.register_service(self._node, STOP_SERVICE, self._svc_stop)
        self.poll_now(publish_snapshot=True)
        self._schedule_poll()

    def shutdown(self):
        if self._poll_timer is not None:
            self._poll_timer.cancel()
            self._poll_timer = None

    def _schedule_poll(self):
        self._poll_timer = self._clock.call_later(self._poll_interval, self._on_poll)

    def _on_poll(self):
        try:
            self.poll_now()
        finally:
            self._schedule_poll()

    def _svc_launch(self, req):
        units = req.get("units", [])
        self._check_roles(units, req.get("token"))
        return {"outcomes": self.launch(units)}

    def _svc_stop(self, req):
        units = req.get("units", [])
        self._check_roles(units, req.get("token"))
        return {"outcomes": self.stop(units)}

    # -- launch / stop ----------------------------------------------------

    def _check_roles(self, unit_ids: list[str], token):
        if self._auth is None:
            return
        role = self._auth.role_of(token)
        known = [u for u in unit_ids if u in self._units]
        for module in self._modules:
            if any(u in module.launch_units for u in known):
                if role not in module.allowed_roles:
                    raise Forbidden(
                        f"role {role!r} may not manage module {module.name!r}")

    def launch(self, unit_ids: list[str]) -> list[dict]:
        outcomes = []
        affected: set[str] = set()
        for unit_id in unit_ids:
            unit = self._units.get(unit_id)
            if unit is None:
                outcomes.append({"unit": unit_id, "status": STATUS_ERROR,
                                 "error": "unknown unit"})
                continue
            with self._lock:
                if unit_id in self._running_units:
                    outcomes.append({"unit": unit_id,
                                     "status": STATUS_ALREADY_LAUNCHED})
                    continue
                self._running_units.add(unit_id)
            self._start_unit(unit)
            affected.add(unit_id)
            outcomes.append({"unit": unit_id, "status": STATUS_STARTED})
        if affected:
            self._mark_pending(affected, PENDING_LAUNCHING)
            self.poll_now()
        return outcomes

    def stop(self, unit_ids: list[str]) -> list[dict]:
        outcomes = []
        affected: set[str] = set()
        for unit_id in unit_ids:
            unit = self._units.get(unit_id)
            if unit is None:
                outcomes.append({"unit": unit_id, "status": STATUS_ERROR,
                                 "error": "unknown unit"})
                continue
            with self._lock:
                if unit_id not in self._running_units:
                    outcomes.append({"unit": unit_id, "status": STATUS_NOT_RUNNING})
                    continue
                self._running_units.discard(unit_id)
            self._stop_unit(unit)
            affected.add(unit_id)
            outcomes.append({"unit": unit_id, "status": STATUS_STOPPED})
        if affected:
            self._mark_pending(affected, PENDING_STOPPING)
            self.poll_now()
        return outcomes

    def _start_unit(self, unit: LaunchUnit):
        if unit.fail_mode == FAIL_NEVER_STARTS:
            return
        timers = self._unit_timers.setdefault(unit.id, [])

        def register_all():
            for name in unit.nodes_started:
                self._bus.register_node(name)

        if unit.startup_delay_ms <= 0:
            register_all()
        else:
            timers.append(self._clock.call_later(unit.startup_delay_ms, register_all))
        if unit.fail_mode == FAIL_DIES_AFTER:
            def die():
                for name in unit.nodes_started:
                    self._bus.deregister_node(name)

            timers.append(self._clock.call_later(
                unit.startup_delay_ms + unit.fail_after_ms, die))

    def _stop_unit(self, unit: LaunchUnit):
        for timer in self._unit_timers.pop(unit.id, []):
            timer.cancel()
        for name in unit.nodes_started:
            self._bus.deregister_node(name)

    def _mark_pending(self, unit_ids: set[str], pending: str):
        now = self._clock.now_ms()
        with self._lock:
            for module in self._modules:
                if any(u in module.launch_units for u in unit_ids):
                    prev = self._states[module.name]
                    self._states[module.name] = replace(
                        prev, pending=pending, pending_since=now)

    def running_units(self) -> set[str]:
        with self._lock:
            return set(self._running_units)

    # -- polling ----------------------------------------------------------

    def states(self) -> dict[str, ModuleState]:
        with self._lock:
            return dict(self._states)

    def poll_now(self, publish_snapshot: bool = False) -> list[tuple[str, ModuleState]]:
        """Apply compute_state to every module against one live snapshot."""
        live = self._bus.list_nodes()
        now = self._clock.now_ms()
        changes: list[tuple[str, ModuleState]] = []
        with self._lock:
            self._tick_count += 1
            snapshot_tick = publish_snapshot or (
                self._snapshot_every > 0
                and self._tick_count % self._snapshot_every == 0)
            for module in self._modules:
                state = compute_state(module, live, self._states[module.name], now,
                                      self._timeout_ms)
                self._states[module.name] = state
                published = self._published.get(module.name)
                if published != (state.value, state.pending):
                    self._published[module.name] = (state.value, state.pending)
                    changes.append((module.name, state))
            busy = any(s.pending != PENDING_NONE for s in self._states.values())
            busy_changed = busy != self._busy_published
            self._busy_published = busy
            to_publish = (
                [(m.name, self._states[m.name]) for m in self._modules]
                if snapshot_tick else changes)
        if to_publish or snapshot_tick:
            self._publish_states(to_publish, full=snapshot_tick)
        if busy_changed:
            self._publish_busy(busy)
        return changes

    def _publish_states(self, entries, full: bool):
        if self._node not in self._bus.list_nodes():
            return
        payload = {
            "full": full,
            "modules": [{"name": name, "state": s.value, "pending": s.pending}
                        for name, s in entries],
        }
        try:
            self._bus.publish(self._node, MODULE_STATES_TOPIC, payload)
        except Exception:
            logger.exception("module state publish failed")

    def _publish_busy(self, busy: bool):
        if self._node not in self._bus.list_nodes():
            return
        try:
            self._bus.publish(self._node, LAUNCH_BUSY_TOPIC, {"busy": busy})
        except Exception:
            logger.exception("launch busy publish failed")
