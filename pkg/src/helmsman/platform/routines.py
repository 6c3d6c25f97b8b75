"""Trajectory/routine recording and replay.

A routine is a named sequence of recorded poses and end-effector
actions. Recording reads the robot's *current* pose (move it first by
whatever means), so a recording session holds group and tool context.
Each routine persists as one JSON document in the routines directory.
"""

from __future__ import annotations

import json
import logging
import threading
from pathlib import Path

from helmsman.platform.auth import PlatformError, _atomic_write
from helmsman.robotsim.motion import Pose
from helmsman.robotsim.robot import Absolute, MotionDisabled, UnknownGroup

logger = logging.getLogger(__name__)

EXECUTE_TOPIC = "/routines/execute"
LOGS_TOPIC = "/ui/logs"


class NoOpenRecording(PlatformError):
    pass


class RecordingOpen(PlatformError):
    pass


class DuplicateName(PlatformError):
    pass


class EmptyRoutine(PlatformError):
    pass


class UnknownRoutine(PlatformError):
    pass


class RoutineStore:
    def __init__(self, directory: str | Path, robot, motion_gate, clock,
                 on_recording_change=None):
        self._dir = Path(directory)
        self._dir.mkdir(parents=True, exist_ok=True)
        self._robot = robot
        self._gate = motion_gate
        self._clock = clock
        self._on_recording_change = on_recording_change
        self._lock = threading.RLock()
        self._recording: dict | None = None
        self._bus = None
        self._node = "routines"

    # -- recording session --------------------------------------------------

    @property
    def recording_open(self) -> bool:
        with self._lock:
            return self._recording is not None

    def start_recording(self, group: str, tool: str) -> dict:
        with self._lock:
            if self._recording is not None:
                raise RecordingOpen("a recording session is already open")
            if group not in self._robot.get_group_names():
                raise UnknownGroup(group)
            self._recording = {"group": group, "tool": tool, "steps": []}
        self._log(f"Recording started for {group} with {tool}")
        self._recording_changed(True)
        return {"recording": True, "group": group, "tool": tool}

    def add_pose(self) -> dict:
        with self._lock:
            rec = self._require_recording()
            pose = self._robot.get_pose(rec["group"])
            rec["steps"].append({"kind": "pose", "pose": pose.to_dict()})
        coords = [round(v, 4) for v in (*pose.position, *pose.orientation)]
        self._log(f"Pose recorded: {coords}")
        return {"recorded": "pose", "pose": pose.to_dict()}

    def add_action(self, action: str) -> dict:
        with self._lock:
            rec = self._require_recording()
            rec["steps"].append({"kind": "action", "action": action})
        self._log(f"{action.capitalize()} recorded")
        return {"recorded": "action", "action": action}

    def save(self, name: str) -> dict:
        with self._lock:
            rec = self._require_recording()
            if not rec["steps"]:
                raise EmptyRoutine("cannot save a routine with no steps")
            if not name or any(c in name for c in "/\\"):
                raise ValueError(f"bad routine name {name!r}")
            path = self._routine_path(name)
            if path.exists():
                raise DuplicateName(name)
            doc = {"name": name, "group": rec["group"], "tool": rec["tool"],
                   "created_at": self._clock.now_ms(), "steps": rec["steps"]}
            _atomic_write(path, (json.dumps(doc, indent=2) + "\n").encode("utf-8"))
            self._recording = None
        self._log(f"Routine saved: {name}")
        self._recording_changed(False)
        return {"saved": name, "steps": len(doc["steps"])}

    def discard(self) -> dict:
        with self._lock:
            self._require_recording()
            self._recording = None
        self._log("Recording discarded")
        self._recording_changed(False)
        return {"discarded": True}

    def _require_recording(self) -> dict:
        if self._recording is None:
            raise NoOpenRecording("no recording session is open")
        return self._recording

    # -- stored routines -----------------------------------------------------

    def _routine_path(self, name: str) -> Path:
        return self._dir / f"{name}.json"

    def list(self) -> list[str]:
        return sorted(p.stem for p in self._dir.glob("*.json"))

    def load(self, name: str) -> dict:
        path = self._routine_path(name)
        if not path.exists():
            raise UnknownRoutine(name)
        return json.loads(path.read_text(encoding="utf-8"))

    def delete(self, name: str) -> None:
        path = self._routine_path(name)
        if not path.exists():
            raise UnknownRoutine(name)
        path.unlink()
        self._log(f"Routine deleted: {name}")

    def execute(self, name: str) -> dict:
        """Replay a routine through the robot, step by step (blocking)."""
        doc = self.load(name)
        if not self._gate.enabled:
            raise MotionDisabled("enable robot motion before executing routines")
        group, tool = doc["group"], doc["tool"]
        self._log(f"Executing routine {name} on {group}")
        for step in doc["steps"]:
            if step["kind"] == "pose":
                self._robot.move_to(group, Absolute(Pose.from_dict(step["pose"])))
            else:
                self._robot.actuate_end_effector(group, tool, step["action"])
        self._log(f"Routine complete: {name}")
        return {"executed": name, "steps": len(doc["steps"])}

    # -- bus wiring ---------------------------------------------------------

    def attach(self, bus, auth=None, node: str = "routines") -> None:
        self._bus = bus
        self._node = node
        bus.register_node(node)
        bus.advertise(node, LOGS_TOPIC, "ui/Log")
        bus.register_service(node, "/routines/list",
                             lambda req: {"routines": self.list()})

        def require_admin(req):
            if auth is not None:
                auth.require_role(req.get("token"), "administrator")

        def svc_record(req):
            require_admin(req)
            op = req.get("op")
            if op == "start":
                return self.start_recording(req["group"], req["tool"])
            if op == "add_pose":
                return self.add_pose()
            if op == "add_action":
                return self.add_action(req["action"])
            if op == "save":
                return self.save(req["name"])
            if op == "discard":
                return self.discard()
            raise ValueError(f"unknown record op {op!r}")

        def svc_delete(req):
            require_admin(req)
            self.delete(req["name"])
            return {"deleted": req["name"]}

        bus.register_service(node, "/routines/record", svc_record)
        bus.register_service(node, "/routines/delete", svc_delete)
        bus.subscribe(node, EXECUTE_TOPIC, self._on_execute)

    def _on_execute(self, msg):
        try:
            self.execute(msg.payload["name"])
        except Exception as exc:
            self._log(f"Routine execution failed: {exc}", severity="error")

    def _log(self, text: str, severity: str = "info"):
        if self._bus is None:
            return
        try:
            self._bus.publish(self._node, LOGS_TOPIC,
                              {"stamp": self._clock.now_ms(), "severity": severity,
                               "text": text})
        except Exception:
            logger.debug("routine log publish skipped", exc_info=True)

    def _recording_changed(self, is_open: bool):
        if self._on_recording_change is not None:
            self._on_recording_change(is_open)
