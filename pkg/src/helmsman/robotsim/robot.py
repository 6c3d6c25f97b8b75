"""Simulated dual-arm robot: motion groups, named configurations,
Cartesian moves with trapezoidal timing, end effectors and tool changes.

Moves play out on the injectable clock; progress is published on
"/robot/status" while a group is moving. This is a simulator, not a
controller: a completed move lands on the target exactly.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass

from helmsman.clock import TimerHandle
from helmsman.robotsim.motion import (
    Pose,
    SpeedProfile,
    interpolate_pose,
    motion_span,
    plan_profile,
)

logger = logging.getLogger(__name__)

STATUS_TOPIC = "/robot/status"
LOGS_TOPIC = "/robot/logs"
EEF_GOAL_TOPIC = "/robot/eef_goal"
TOOL_CHANGE_TOPIC = "/robot/tool_change"

TOOL_CHANGE_DELAY_MS = 3000.0


class RobotError(Exception):
    pass


class UnknownGroup(RobotError):
    pass


class UnknownConfig(RobotError):
    pass


class UnknownTool(RobotError):
    pass


class Busy(RobotError):
    pass


class MotionDisabled(RobotError):
    pass


class LimitExceeded(RobotError):
    pass


class ToolMismatch(RobotError):
    pass


class MotionGate:
    """Shared enable flag for real robot motion.

    When disabled, manual moves and routine replays are refused; the
    process executor dry-runs its move steps instead.
    """

    def __init__(self, enabled: bool = True):
        self._enabled = enabled
        self._lock = threading.Lock()

    @property
    def enabled(self) -> bool:
        with self._lock:
            return self._enabled

    def set(self, flag: bool) -> None:
        with self._lock:
            self._enabled = bool(flag)


@dataclass(frozen=True)
class NamedConfig:
    name: str


@dataclass(frozen=True)
class Absolute:
    pose: Pose


@dataclass(frozen=True)
class Relative:
    delta: Pose


Target = NamedConfig | Absolute | Relative


@dataclass
class MotionResult:
    success: bool
    duration_ms: float
    final: Pose
    error: str | None = None

    def to_dict(self) -> dict:
        d = {"success": self.success, "duration_ms": self.duration_ms,
             "final": self.final.to_dict()}
        if self.error:
            d["error"] = self.error
        return d


def target_from_dict(d: dict) -> Target:
    kind = d.get("type")
    if kind == "named":
        return NamedConfig(d["name"])
    if kind == "absolute":
        return Absolute(Pose.from_dict(d["pose"]))
    if kind == "relative":
        return Relative(Pose.from_dict(d["delta"]))
    raise ValueError(f"unknown move target type: {kind!r}")


class _Motion:
    __slots__ = ("start", "goal", "profile", "t0", "on_complete",
                 "progress_timer", "complete_timer")

    def __init__(self, start: Pose, goal: Pose, profile: SpeedProfile, t0: float,
                 on_complete):
        self.start = start
        self.goal = goal
        self.profile = profile
        self.t0 = t0
        self.on_complete = on_complete
        self.progress_timer: TimerHandle | None = None
        self.complete_timer: TimerHandle | None = None


class _Group:
    def __init__(self, spec: dict):
        self.name = spec["name"]
        self.named_configs = {
            name: Pose.from_dict(p).normalized()
            for name, p in spec["named_configs"].items()
        }
        if not self.named_configs:
            raise ValueError(f"group {self.name}: named_configs must be non-empty")
        home = spec.get("home", next(iter(self.named_configs)))
        if home not in self.named_configs:
            raise ValueError(f"group {self.name}: home config {home!r} not defined")
        self.current: Pose = self.named_configs[home]
        self.tools = list(spec.get("tools", []))
        self.attached_tool = spec.get("attached_tool", self.tools[0] if self.tools else "")
        self.speed_limit = float(spec.get("speed_limit", 1.0))
        self.accel_limit = float(spec.get("accel_limit", 2.0))
        if self.speed_limit <= 0 or self.accel_limit <= 0:
            raise ValueError(f"group {self.name}: speed/accel limits must be > 0")
        self.motion: _Motion | None = None
        self.changing_tool = False


class RobotSim:
    def __init__(self, clock, fixture: dict, motion_gate: MotionGate | None = None,
                 status_interval_ms: float = 100.0):
        self._clock = clock
        self._gate = motion_gate or MotionGate()
        self._status_interval = status_interval_ms
        self._lock = threading.RLock()
        self._groups: dict[str, _Group] = {}
        self._order: list[str] = []
        for spec in fixture.get("groups", []):
            group = _Group(spec)
            if group.name in self._groups:
                raise ValueError(f"duplicate group name {group.name!r}")
            self._groups[group.name] = group
            self._order.append(group.name)
        self._tool_states: dict[tuple[str, str], str] = {}
        self._events: list[dict] = []
        self._bus = None
        self._node = "robot"

    @property
    def motion_gate(self) -> MotionGate:
        return self._gate

    # -- bus wiring -----------------------------------------------------

    def attach(self, bus, node: str = "robot", register_motion_services: bool = True):
        """Register the robot node; motion services are feature-gated."""
        self._bus = bus
        self._node = node
        bus.register_node(node)
        bus.register_type("robot/Status", ["group", "pose", "moving"])
        bus.register_type("robot/Log", ["text", "severity"])
        bus.advertise(node, STATUS_TOPIC, "robot/Status")
        bus.advertise(node, LOGS_TOPIC, "robot/Log")
        if register_motion_services:
            bus.register_service(node, "/robot/get_groups",
                                 lambda req: {"groups": self.get_group_names()})
            bus.register_service(node, "/robot/get_named_configs", self._svc_named_configs)
            bus.register_service(node, "/robot/get_pose", self._svc_get_pose)
            bus.register_service(node, "/robot/move", self._svc_move)
            bus.subscribe(node, EEF_GOAL_TOPIC, self._on_eef_goal)
            bus.subscribe(node, TOOL_CHANGE_TOPIC, self._on_tool_change)

    def _svc_named_configs(self, req):
        group = self._group(req["group"])
        return {"group": group.name, "configs": list(group.named_configs)}

    def _svc_get_pose(self, req):
        group_name = req["group"]
        pose = self.get_pose(group_name)
        with self._lock:
            moving = self._groups[group_name].motion is not None
        return {"group": group_name, "pose": pose.to_dict(), "moving": moving}

    def _svc_move(self, req):
        result = self.move_to(
            req["group"],
            target_from_dict(req["target"]),
            speed=req.get("speed"),
            accel=req.get("accel"),
        )
        return result.to_dict()

    def _on_eef_goal(self, msg):
        try:
            self.actuate_end_effector(msg.payload["arm"], msg.payload["tool"],
                                      msg.payload["action"])
        except (RobotError, KeyError) as exc:
            self._log(f"EEF goal rejected: {exc}", severity="error")

    def _on_tool_change(self, msg):
        try:
            self.start_tool_change(msg.payload["arm"], msg.payload["tool"])
        except (RobotError, KeyError) as exc:
            self._log(f"Tool change rejected: {exc}", severity="error")

    # -- queries ---------------------------------------------------------

    def get_group_names(self) -> list[str]:
        return list(self._order)

    def get_named_configs(self, group: str) -> list[str]:
        return list(self._group(group).named_configs)

    def get_pose(self, group: str) -> Pose:
        with self._lock:
            g = self._group(group)
            if g.motion is None:
                return g.current
            return self._pose_at(g, self._clock.now_ms())

    def attached_tool(self, group: str) -> str:
        with self._lock:
            return self._group(group).attached_tool

    def tool_state(self, group: str, tool: str) -> str | None:
        with self._lock:
            return self._tool_states.get((group, tool))

    def is_moving(self, group: str) -> bool:
        with self._lock:
            return self._group(group).motion is not None

    def event_log(self) -> list[dict]:
        with self._lock:
            return list(self._events)

    def _group(self, name: str) -> _Group:
        g = self._groups.get(name)
        if g is None:
            raise UnknownGroup(name)
        return g

    def _pose_at(self, g: _Group, now: float) -> Pose:
        m = g.motion
        elapsed_s = max(0.0, (now - m.t0) / 1000.0)
        return interpolate_pose(m.start, m.goal, m.profile.fraction_at(elapsed_s))

    # -- motion ----------------------------------------------------------

    def resolve_target(self, group: str, target: Target) -> Pose:
        g = self._group(group)
        if isinstance(target, NamedConfig):
            pose = g.named_configs.get(target.name)
            if pose is None:
                raise UnknownConfig(f"{group}: {target.name}")
            return pose
        if isinstance(target, Absolute):
            return target.pose.normalized()
        if isinstance(target, Relative):
            base = g.current
            return Pose(
                tuple(c + d for c, d in zip(base.position, target.delta.position)),
                tuple(c + d for c, d in zip(base.orientation, target.delta.orientation)),
            ).normalized()
        raise TypeError(f"bad target: {target!r}")

    def start_motion(self, group: str, target: Target, speed: float | None = None,
                     accel: float | None = None, on_complete=None) -> MotionResult:
        """Begin a move; returns the planned result (final pose, duration).

        on_complete fires with the actual MotionResult when the move ends
        (or is cancelled). Zero-span moves complete synchronously.
        """
        with self._lock:
            g = self._group(group)
            goal = self.resolve_target(group, target)
            if g.motion is not None:
                raise Busy(group)
            if not self._gate.enabled:
                raise MotionDisabled(group)
            speed = g.speed_limit if speed is None else float(speed)
            accel = g.accel_limit if accel is None else float(accel)
            if speed > g.speed_limit or speed <= 0:
                raise LimitExceeded(f"speed {speed} outside (0, {g.speed_limit}]")
            if accel > g.accel_limit or accel <= 0:
                raise LimitExceeded(f"accel {accel} outside (0, {g.accel_limit}]")
            span = motion_span(g.current, goal)
            if span == 0.0:
                g.current = goal
                result = MotionResult(True, 0.0, goal)
                self._publish_status(g, goal, moving=False, progress=1.0)
                if on_complete:
                    on_complete(result)
                return result
            profile = plan_profile(span, speed, accel)
            now = self._clock.now_ms()
            motion = _Motion(g.current, goal, profile, now, on_complete)
            g.motion = motion
            duration_ms = profile.duration_s * 1000.0
            motion.progress_timer = self._clock.call_later(
                self._status_interval, lambda: self._progress_tick(g.name))
            motion.complete_timer = self._clock.call_later(
                duration_ms, lambda: self._complete_motion(g.name))
        self._publish_status(g, motion.start, moving=True, progress=0.0)
        return MotionResult(True, duration_ms, goal)

    def move_to(self, group: str, target: Target, speed: float | None = None,
                accel: float | None = None, wall_timeout_s: float = 60.0) -> MotionResult:
        """Blocking move. Must not be called from the clock's timer thread."""
        done = threading.Event()
        box: dict = {}

        def finished(result: MotionResult):
            box["result"] = result
            done.set()

        planned = self.start_motion(group, target, speed, accel, on_complete=finished)
        if planned.duration_ms == 0.0:
            return planned
        if not done.wait(timeout=wall_timeout_s):
            raise TimeoutError(f"move on {group} did not complete in {wall_timeout_s}s wall time")
        return box["result"]

    def cancel_motion(self, group: str) -> bool:
        with self._lock:
            g = self._group(group)
            m = g.motion
            if m is None:
                return False
            m.progress_timer.cancel()
            m.complete_timer.cancel()
            now = self._clock.now_ms()
            g.current = self._pose_at(g, now)
            g.motion = None
            result = MotionResult(False, now - m.t0, g.current, error="canceled")
            pose = g.current
        self._publish_status(g, pose, moving=False, progress=None)
        self._log(f"Motion on {group} canceled", severity="warning")
        if m.on_complete:
            m.on_complete(result)
        return True

    def _progress_tick(self, group: str):
        with self._lock:
            g = self._groups[group]
            m = g.motion
            if m is None:
                return
            now = self._clock.now_ms()
            pose = self._pose_at(g, now)
            elapsed_s = (now - m.t0) / 1000.0
            progress = m.profile.fraction_at(elapsed_s)
            m.progress_timer = self._clock.call_later(
                self._status_interval, lambda: self._progress_tick(group))
        self._publish_status(g, pose, moving=True, progress=progress)

    def _complete_motion(self, group: str):
        with self._lock:
            g = self._groups[group]
            m = g.motion
            if m is None:
                return
            m.progress_timer.cancel()
            g.current = m.goal
            g.motion = None
            now = self._clock.now_ms()
            result = MotionResult(True, now - m.t0, m.goal)
        self._publish_status(g, m.goal, moving=False, progress=1.0)
        if m.on_complete:
            m.on_complete(result)

    # -- end effectors -----------------------------------------------------

    def actuate_end_effector(self, arm: str, tool: str, action: str) -> dict:
        with self._lock:
            g = self._group(arm)
            if g.attached_tool != tool:
                raise ToolMismatch(f"{arm} has {g.attached_tool!r}, not {tool!r}")
            if tool == "gripper" and action in ("open", "close"):
                self._tool_states[(arm, tool)] = "open" if action == "open" else "closed"
            event = {"stamp": self._clock.now_ms(), "arm": arm, "tool": tool,
                     "action": action}
            self._events.append(event)
        self._log(f"EEF {tool} on {arm}: {action}")
        return {"acknowledged": True, **event}

    def start_tool_change(self, arm: str, new_tool: str) -> dict:
        with self._lock:
            g = self._group(arm)
            if g.motion is not None or g.changing_tool:
                raise Busy(arm)
            if new_tool not in g.tools:
                raise UnknownTool(f"{new_tool!r} not available on {arm}")
            if g.attached_tool == new_tool:
                return {"acknowledged": True, "arm": arm, "tool": new_tool,
                        "changed": False}
            g.changing_tool = True

            def finish():
                with self._lock:
                    g.attached_tool = new_tool
                    g.changing_tool = False
                self._log(f"Tool change complete: {arm} now has {new_tool}")

            self._clock.call_later(TOOL_CHANGE_DELAY_MS, finish)
        self._log(f"Tool change started on {arm}: -> {new_tool}")
        return {"acknowledged": True, "arm": arm, "tool": new_tool, "changed": True}

    # -- publishing --------------------------------------------------------

    def _publish_status(self, g: _Group, pose: Pose, moving: bool, progress):
        if self._bus is None:
            return
        payload = {"group": g.name, "pose": pose.to_dict(), "moving": moving}
        if progress is not None:
            payload["progress"] = progress
        try:
            self._bus.publish(self._node, STATUS_TOPIC, payload)
        except Exception:
            logger.exception("status publish failed")

    def _log(self, text: str, severity: str = "info"):
        if self._bus is None:
            return
        try:
            self._bus.publish(self._node, LOGS_TOPIC,
                              {"text": text, "severity": severity})
        except Exception:
            logger.exception("log publish failed")
