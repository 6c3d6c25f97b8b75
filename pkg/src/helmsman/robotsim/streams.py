"""Synthetic sensor and video stream generators.

Each configured graph or camera publishes on its own topic at its own
rate, driven by the injectable clock. Message shapes follow the two
standardized graph kinds:

* scatter          -> {"x": [...], "y": [...]}
* time_evolution   -> {"names": [...], "values": [...]}, |names| == |values|
"""

from __future__ import annotations

import base64
import math
from dataclasses import dataclass, field

from helmsman.robotsim.frames import render_frame

SCATTER = "scatter"
TIME_EVOLUTION = "time_evolution"


@dataclass
class SensorGraphSpec:
    name: str
    id: str
    title: str
    kind: str
    topic: str
    rate_hz: float
    labels: list[str] = field(default_factory=list)
    axes: dict = field(default_factory=dict)
    points: int = 16

    def __post_init__(self):
        if self.kind not in (SCATTER, TIME_EVOLUTION):
            raise ValueError(f"graph {self.name}: unknown kind {self.kind!r}")
        if self.rate_hz <= 0:
            raise ValueError(f"graph {self.name}: rate_hz must be > 0")
        if self.kind == TIME_EVOLUTION and not self.labels:
            raise ValueError(f"graph {self.name}: time_evolution needs labels")

    @classmethod
    def from_dict(cls, d: dict) -> "SensorGraphSpec":
        return cls(
            name=d["name"],
            id=d.get("id", d["name"]),
            title=d.get("title", d["name"]),
            kind=d["kind"],
            topic=d["topic"],
            rate_hz=float(d["rate_hz"]),
            labels=list(d.get("labels", [])),
            axes=dict(d.get("axes", {})),
            points=int(d.get("points", 16)),
        )

    def to_dict(self) -> dict:
        return {"name": self.name, "id": self.id, "title": self.title,
                "kind": self.kind, "topic": self.topic, "rate_hz": self.rate_hz,
                "labels": self.labels, "axes": self.axes, "points": self.points}


def default_signal(spec: SensorGraphSpec, t_s: float) -> dict:
    """Deterministic synthetic signal for a graph spec at time t."""
    if spec.kind == TIME_EVOLUTION:
        values = [
            round(math.sin(2.0 * math.pi * (0.2 + 0.07 * i) * t_s + i), 4)
            for i in range(len(spec.labels))
        ]
        return {"names": list(spec.labels), "values": values}
    xs = list(range(spec.points))
    ys = [round(math.sin(0.5 * x + t_s), 4) for x in xs]
    return {"x": xs, "y": ys}


class SensorStreams:
    def __init__(self, bus, clock, specs: list[SensorGraphSpec],
                 node: str = "sensor_streams", generator=default_signal):
        self._bus = bus
        self._clock = clock
        self._specs = list(specs)
        self._node = node
        self._generator = generator
        self._timers = []
        self._running = False

    @property
    def specs(self) -> list[SensorGraphSpec]:
        return list(self._specs)

    def start(self):
        self._bus.register_node(self._node)
        self._bus.register_type("sensors/Scatter", ["x", "y"])
        self._bus.register_type("sensors/TimeEvolution", ["names", "values"])
        self._running = True
        for spec in self._specs:
            type_name = "sensors/Scatter" if spec.kind == SCATTER else "sensors/TimeEvolution"
            self._bus.advertise(self._node, spec.topic, type_name)
            self._schedule(spec)

    def stop(self):
        self._running = False
        for handle in self._timers:
            handle.cancel()
        self._timers.clear()

    def _schedule(self, spec: SensorGraphSpec):
        period_ms = 1000.0 / spec.rate_hz

        def tick():
            if not self._running:
                return
            payload = self._generator(spec, self._clock.now_ms() / 1000.0)
            self._bus.publish(self._node, spec.topic, payload)
            self._timers.append(self._clock.call_later(period_ms, tick))

        self._timers.append(self._clock.call_later(period_ms, tick))


class VideoStreams:
    def __init__(self, bus, clock, streams: list[dict], robot=None,
                 node: str = "cameras"):
        self._bus = bus
        self._clock = clock
        self._streams = [dict(s) for s in streams]
        self._robot = robot
        self._node = node
        self._timers = []
        self._counters: dict[str, int] = {}
        self._running = False

    @property
    def streams(self) -> list[dict]:
        return [dict(s) for s in self._streams]

    def start(self):
        self._bus.register_node(self._node)
        self._bus.register_type("video/Frame", ["format", "data", "stamp", "frame_id"])
        self._running = True
        for stream in self._streams:
            self._bus.advertise(self._node, stream["topic"], "video/Frame")
            self._counters[stream["name"]] = 0
            self._schedule(stream)

    def stop(self):
        self._running = False
        for handle in self._timers:
            handle.cancel()
        self._timers.clear()

    def _pose_overlay(self) -> dict | None:
        if self._robot is None:
            return None
        names = self._robot.get_group_names()
        if not names:
            return None
        return self._robot.get_pose(names[0]).to_dict()

    def _schedule(self, stream: dict):
        period_ms = 1000.0 / float(stream["fps"])
        name = stream["name"]

        def tick():
            if not self._running:
                return
            self._counters[name] += 1
            frame_id = self._counters[name]
            png = render_frame(frame_id, pose=self._pose_overlay())
            self._bus.publish(self._node, stream["topic"], {
                "format": "png",
                "data": base64.b64encode(png).decode("ascii"),
                "stamp": self._clock.now_ms(),
                "frame_id": frame_id,
            })
            self._timers.append(self._clock.call_later(period_ms, tick))

        self._timers.append(self._clock.call_later(period_ms, tick))
