"""Automatic and semi-automatic process execution.

Two bus nodes mirror the executor/intermediary split: the server node
runs one operation at a time (its robot commands as an event-driven
chain, with a hold gate between commands), the client node owns every
UI-facing topic and service, sequences the run, and enforces the mode
machine. They talk only through the goal/feedback topic pair, so a
different executor can replace the server without touching the UI
contract.

Modes: idle, running, paused, stepping, stopped, fault.
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass, field
from pathlib import Path

from helmsman.robotsim.robot import MotionGate, RobotError, target_from_dict

logger = logging.getLogger(__name__)

IDLE = "idle"
RUNNING = "running"
PAUSED = "paused"
STEPPING = "stepping"
STOPPED = "stopped"
FAULT = "fault"

MODES = (IDLE, RUNNING, PAUSED, STEPPING, STOPPED, FAULT)
COMMANDS = ("start", "stop", "pause", "resume", "step")

GOAL_TOPIC = "/process/server/goal"
FEEDBACK_TOPIC = "/process/server/feedback"
CURRENT_OP_TOPIC = "/process/current_op"
LOGS_TOPIC = "/ui/logs"
STATUS_PANEL_TOPIC = "/ui/status_panel"
CMD_TOPICS = {cmd: f"/process/cmd/{cmd}" for cmd in COMMANDS}


class NoProcess(Exception):
    pass


class UnknownField(Exception):
    pass


@dataclass
class Operation:
    index: int
    label: str
    steps: list[dict] = field(default_factory=list)


@dataclass
class ProcessDefinition:
    name: str
    operations: list[Operation]

    def __post_init__(self):
        if not self.operations:
            raise ValueError(f"process {self.name}: needs at least one operation")
        for i, op in enumerate(self.operations):
            if op.index != i:
                raise ValueError(
                    f"process {self.name}: indices must be contiguous from 0")
        labels = [op.label for op in self.operations]
        if len(labels) != len(set(labels)):
            raise ValueError(f"process {self.name}: labels must be unique")

    @classmethod
    def from_dict(cls, d: dict) -> "ProcessDefinition":
        return cls(
            name=d["name"],
            operations=[Operation(index=o["index"], label=o["label"],
                                  steps=list(o.get("steps", [])))
                        for o in d["operations"]],
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "ProcessDefinition":
        with open(path, encoding="utf-8") as f:
            return cls.from_dict(json.load(f))


class ProcessServer:
    """Executes one operation at a time against the robot."""

    def __init__(self, bus, clock, robot, motion_gate: MotionGate,
                 definition: ProcessDefinition | None, alarms=None,
                 node: str = "process_server"):
        self._bus = bus
        self._clock = clock
        self._robot = robot
        self._gate = motion_gate
        self._alarms = alarms
        self._definition = definition
        self._node = node
        self._lock = threading.RLock()
        self._index: int | None = None
        self._steps: list[dict] = []
        self._pos = 0
        self._hold = False
        self._parked = False
        self._cancelled = False
        self._moving_group: str | None = None
        self._wait_timer = None

    def start(self):
        self._bus.register_node(self._node)
        self._bus.register_type("process/Feedback", ["event", "index"])
        self._bus.advertise(self._node, FEEDBACK_TOPIC, "process/Feedback")
        self._bus.subscribe(self._node, GOAL_TOPIC, self._on_goal)

    def load(self, definition: ProcessDefinition | None):
        with self._lock:
            self._definition = definition

    def _on_goal(self, msg):
        action = msg.payload.get("action")
        if action == "run":
            self._run(int(msg.payload["index"]))
        elif action == "cancel":
            self._cancel()
        elif action == "hold":
            with self._lock:
                self._hold = True
        elif action == "release":
            self._release()
        else:
            logger.warning("unknown goal action: %r", action)

    def _run(self, index: int):
        with self._lock:
            if self._definition is None or self._index is not None:
                self._feedback("op_failed", index,
                               error="executor busy or no process loaded")
                return
            if not 0 <= index < len(self._definition.operations):
                self._feedback("op_failed", index, error="index out of range")
                return
            operation = self._definition.operations[index]
            self._index = index
            self._steps = operation.steps
            self._pos = 0
            self._cancelled = False
        self._feedback("op_started", index)
        self._advance()

    def _cancel(self):
        with self._lock:
            if self._index is None:
                return
            self._cancelled = True
            moving = self._moving_group
            timer = self._wait_timer
            parked = self._parked or self._hold
        if timer is not None:
            timer.cancel()
            self._finish("op_canceled")
            return
        if moving is not None:
            self._robot.cancel_motion(moving)  # on_complete path finishes
            return
        if parked:
            self._finish("op_canceled")

    def _release(self):
        with self._lock:
            self._hold = False
            if not self._parked:
                return
            self._parked = False
        self._advance()

    def _advance(self):
        while True:
            with self._lock:
                if self._index is None:
                    return
                cancelled = self._cancelled
                done = self._pos >= len(self._steps)
                if not cancelled and not done:
                    if self._hold:
                        self._parked = True
                        return
                    step = self._steps[self._pos]
                    self._pos += 1
            if cancelled:
                self._finish("op_canceled")
                return
            if done:
                self._finish("op_completed")
                return
            if not self._execute(step):
                return

    def _execute(self, step: dict) -> bool:
        """Run one robot command; False when completion is asynchronous."""
        kind = step.get("kind")
        try:
            if kind == "move_to":
                if not self._gate.enabled:
                    self._log(f"dry-run (motion disabled): skip move in "
                              f"{step.get('group', '?')}")
                    return True
                target = target_from_dict(step["target"])
                with self._lock:
                    self._moving_group = step["group"]
                self._robot.start_motion(
                    step["group"], target, speed=step.get("speed"),
                    accel=step.get("accel"), on_complete=self._motion_done)
                if step.get("speed") is not None:
                    self._panel({"robot_speed": step["speed"]})
                return False
            if kind == "wait":
                with self._lock:
                    self._wait_timer = self._clock.call_later(
                        float(step["ms"]), self._wait_done)
                return False
            if kind == "actuate":
                self._robot.actuate_end_effector(step["arm"], step["tool"],
                                                 step["action"])
                return True
            if kind == "raise_alarm":
                if self._alarms is not None:
                    self._alarms.raise_alarm(step["id"], step.get("text", ""))
                return True
            raise ValueError(f"unknown step kind {kind!r}")
        except (RobotError, ValueError, KeyError) as exc:
            with self._lock:
                self._moving_group = None
            self._log(f"step failed: {exc}", severity="error")
            self._finish("op_failed", error=str(exc))
            return False

    def _motion_done(self, result):
        with self._lock:
            self._moving_group = None
            cancelled = self._cancelled
        if not result.success or cancelled:
            self._finish("op_canceled")
            return
        self._log(f"Motion OK ({result.duration_ms:.0f} ms)")
        self._advance()

    def _wait_done(self):
        with self._lock:
            self._wait_timer = None
        self._advance()

    def _finish(self, event: str, error: str | None = None):
        with self._lock:
            index = self._index
            self._index = None
            self._steps = []
            self._pos = 0
            self._hold = False
            self._parked = False
            self._cancelled = False
            self._moving_group = None
            self._wait_timer = None
        if index is not None:
            self._feedback(event, index, error=error)

    def _feedback(self, event: str, index: int, error: str | None = None):
        payload = {"event": event, "index": index}
        if error:
            payload["error"] = error
        self._bus.publish(self._node, FEEDBACK_TOPIC, payload)

    def _log(self, text: str, severity: str = "info"):
        try:
            self._bus.publish(self._node, LOGS_TOPIC,
                              {"stamp": self._clock.now_ms(), "severity": severity,
                               "text": text})
        except Exception:
            logger.debug("server log publish skipped", exc_info=True)

    def _panel(self, values: dict):
        try:
            self._bus.publish(self._node, STATUS_PANEL_TOPIC, {"fields": values})
        except Exception:
            logger.debug("server panel publish skipped", exc_info=True)


class ProcessClient:
    """UI-facing intermediary: mode machine, sequencing, feedback panels."""

    def __init__(self, bus, clock, motion_gate: MotionGate,
                 definition: ProcessDefinition | None,
                 panel_fields: list[dict] | None = None,
                 node: str = "process_client", on_mode_change=None):
        self._bus = bus
        self._clock = clock
        self._gate = motion_gate
        self._definition = definition
        self._node = node
        self._on_mode_change = on_mode_change
        self._lock = threading.RLock()
        self._mode = IDLE
        self._cursor = 0
        self._inflight: int | None = None
        self._prior_mode = IDLE
        self._run_started_at: float | None = None
        declared = panel_fields or []
        self._panel_meta = list(declared)
        self._panel = {f["id"]: f.get("default") for f in declared}
        self._panel.setdefault("motion_enabled", self._gate.enabled)
        self._panel.setdefault("mode", IDLE)
        self._panel.setdefault("total_time_ms", 0)

    def start(self):
        bus = self._bus
        bus.register_node(self._node)
        bus.register_type("process/Goal", ["action"])
        bus.register_type("process/CurrentOp", ["index"])
        bus.register_type("ui/Log", ["text", "severity"])
        bus.register_type("ui/StatusPanel", ["fields"])
        bus.advertise(self._node, GOAL_TOPIC, "process/Goal")
        bus.advertise(self._node, CURRENT_OP_TOPIC, "process/CurrentOp")
        bus.advertise(self._node, LOGS_TOPIC, "ui/Log")
        bus.advertise(self._node, STATUS_PANEL_TOPIC, "ui/StatusPanel")
        bus.subscribe(self._node, FEEDBACK_TOPIC, self._on_feedback)
        for cmd, topic in CMD_TOPICS.items():
            bus.subscribe(self._node, topic,
                          lambda msg, c=cmd: self._on_cmd(c, msg))
        bus.register_service(self._node, "/process/get_operations",
                             self._svc_get_operations)
        bus.register_service(self._node, "/process/enable_motion",
                             lambda req: self._svc_motion(True))
        bus.register_service(self._node, "/process/disable_motion",
                             lambda req: self._svc_motion(False))
        self.publish_feedback("status", {})

    def load(self, definition: ProcessDefinition | None):
        with self._lock:
            self._definition = definition
            self._cursor = 0

    # -- services --------------------------------------------------------

    def _svc_get_operations(self, req):
        with self._lock:
            if self._definition is None:
                raise NoProcess("no process definition loaded")
            return {"name": self._definition.name,
                    "operations": [{"index": op.index, "label": op.label}
                                   for op in self._definition.operations]}

    def _svc_motion(self, flag: bool):
        self.set_motion_enabled(flag)
        return {"motion_enabled": flag}

    def set_motion_enabled(self, flag: bool):
        self._gate.set(flag)
        self.publish_feedback("status", {"motion_enabled": bool(flag)})

    # -- mode machine -------------------------------------------------------

    @property
    def mode(self) -> str:
        with self._lock:
            return self._mode

    def status(self) -> dict:
        with self._lock:
            return {
                "mode": self._mode,
                "current_index": self._inflight if self._inflight is not None
                                 else self._cursor,
                "motion_enabled": self._gate.enabled,
                "panel": dict(self._panel),
            }

    def _on_cmd(self, cmd: str, msg):
        index = None
        if isinstance(msg.payload, dict):
            index = msg.payload.get("index")
        self.command(cmd, index=index)

    def command(self, cmd: str, index: int | None = None) -> bool:
        """Apply a control command; illegal transitions are refused with a
        log-panel message, never a fault."""
        if cmd not in COMMANDS:
            self._log(f"unknown command {cmd!r}", severity="error")
            return False
        with self._lock:
            mode = self._mode
            if cmd == "start":
                if mode not in (IDLE, STOPPED):
                    return self._refuse(cmd, mode, "already running"
                                        if mode == RUNNING else None)
                if self._definition is None:
                    return self._refuse(cmd, mode, "no process loaded")
                self._cursor = 0
                self._run_started_at = self._clock.now_ms()
                self._set_mode(RUNNING)
                self._dispatch(self._cursor)
                return True
            if cmd == "pause":
                if mode != RUNNING:
                    return self._refuse(cmd, mode)
                self._set_mode(PAUSED)
                self._goal({"action": "hold"})
                self._log("Paused: holding after the in-flight robot command")
                return True
            if cmd == "resume":
                if mode != PAUSED:
                    return self._refuse(cmd, mode)
                self._set_mode(RUNNING)
                self._goal({"action": "release"})
                if self._inflight is None:
                    if self._cursor < len(self._definition.operations):
                        self._dispatch(self._cursor)
                    else:
                        self._complete_run()
                return True
            if cmd == "stop":
                if mode == IDLE:
                    return self._refuse(cmd, mode)
                self._set_mode(STOPPED)
                self._goal({"action": "cancel"})
                self._log("Stopped")
                return True
            # step
            if mode not in (IDLE, STOPPED, PAUSED):
                return self._refuse(cmd, mode)
            if self._inflight is not None:
                return self._refuse(cmd, mode, "an operation is still in flight")
            if self._definition is None:
                return self._refuse(cmd, mode, "no process loaded")
            if index is None or not (0 <= index < len(self._definition.operations)):
                return self._refuse(cmd, mode, f"invalid operation index {index!r}")
            self._prior_mode = mode
            self._set_mode(STEPPING)
            self._dispatch(index)
            return True

    def _refuse(self, cmd: str, mode: str, reason: str | None = None) -> bool:
        detail = reason or f"{cmd!r} is not legal while {mode}"
        self._log(f"Command refused: {detail}", severity="warning")
        return False

    def _set_mode(self, mode: str):
        self._mode = mode
        self._panel["mode"] = mode
        if self._on_mode_change is not None:
            self._on_mode_change(mode)
        self._publish(STATUS_PANEL_TOPIC, {"fields": dict(self._panel)})

    def _dispatch(self, index: int):
        operation = self._definition.operations[index]
        self._inflight = index
        self._publish_current(index, operation.label)
        self._goal({"action": "run", "index": index})

    def _complete_run(self):
        elapsed = (self._clock.now_ms() - self._run_started_at
                   if self._run_started_at is not None else 0.0)
        self._set_mode(IDLE)
        self._run_started_at = None
        self._log("Process complete")
        self.publish_feedback("status", {"total_time_ms": round(elapsed, 3)})

    def _on_feedback(self, msg):
        event = msg.payload.get("event")
        index = msg.payload.get("index")
        with self._lock:
            if event == "op_completed":
                self._inflight = None
                if self._mode == STEPPING:
                    self._set_mode(self._prior_mode)
                    return
                # sequential run: the cursor advances even if a pause or
                # stop landed while the operation was finishing
                self._cursor = index + 1
                if self._mode == RUNNING:
                    if self._cursor < len(self._definition.operations):
                        self._dispatch(self._cursor)
                    else:
                        self._complete_run()
                return
            if event == "op_canceled":
                self._inflight = None
                return
            if event == "op_failed":
                self._inflight = None
                self._set_mode(FAULT)
                self._log(f"Operation {index} failed: "
                          f"{msg.payload.get('error', 'unknown error')}",
                          severity="error")
                return

    # -- feedback panels ---------------------------------------------------

    def publish_feedback(self, kind: str, payload: dict):
        """log -> append-only /ui/logs; status -> merge-update /ui/status_panel."""
        if kind == "log":
            self._log(payload.get("text", ""), payload.get("severity", "info"))
            return
        if kind != "status":
            raise ValueError(f"unknown feedback kind {kind!r}")
        with self._lock:
            unknown = [k for k in payload if k not in self._panel]
            if unknown:
                raise UnknownField(f"undeclared status panel fields: {unknown}")
            self._panel.update(payload)
            snapshot = dict(self._panel)
        self._publish(STATUS_PANEL_TOPIC, {"fields": snapshot})

    def panel_fields(self) -> list[dict]:
        return list(self._panel_meta)

    def _publish_current(self, index: int, label: str):
        self._publish(CURRENT_OP_TOPIC, {"index": index, "label": label})

    def _goal(self, payload: dict):
        self._publish(GOAL_TOPIC, payload)

    def _log(self, text: str, severity: str = "info"):
        self._publish(LOGS_TOPIC, {"stamp": self._clock.now_ms(),
                                   "severity": severity, "text": text})

    def _publish(self, topic: str, payload: dict):
        try:
            self._bus.publish(self._node, topic, payload)
        except Exception:
            logger.exception("publish to %s failed", topic)
