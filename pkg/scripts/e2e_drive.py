"""End-to-end drive: boot the real platform with the WebSocket bridge,
run a full operator/administrator session through a real socket, and
verify the user-visible behaviors. Exits nonzero on any failure.

Usage: python3 scripts/e2e_drive.py
"""
import json
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from websockets.sync.client import connect

from helmsman.config import load_platform_config
from helmsman.runtime import boot

failures = []


def step(name, ok, detail=""):
    print(f"  {'OK ' if ok else 'FAIL'} {name} {detail}")
    if not ok:
        failures.append(name)


class Session:
    """Single-threaded frame pump: publishes are collected, never lost."""

    def __init__(self, ws):
        self.ws = ws
        self.published = []  # (topic, msg)

    def pump(self, timeout=0.05):
        try:
            frame = json.loads(self.ws.recv(timeout=timeout))
        except TimeoutError:
            return None
        if frame.get("op") == "publish":
            self.published.append((frame["topic"], frame["msg"]))
        return frame

    def call(self, service, args=None, cid="c", timeout=10.0):
        self.ws.send(json.dumps({"op": "call_service", "service": service,
                                 "args": args or {}, "id": cid}))
        deadline = time.time() + timeout
        while time.time() < deadline:
            frame = self.pump(timeout=0.5)
            if (frame and frame.get("op") == "service_response"
                    and frame.get("id") == cid):
                return frame
        raise TimeoutError(service)

    def drain(self, seconds):
        deadline = time.time() + seconds
        while time.time() < deadline:
            self.pump(timeout=0.1)

    def topic(self, name):
        return [msg for t, msg in self.published if t == name]


def main():
    config = load_platform_config("fixtures/platform.json", port_override=0)
    platform = boot(config, serve=True, host="127.0.0.1")
    try:
        with connect(f"ws://127.0.0.1:{platform.port}") as ws:
            s = Session(ws)
            greeting = json.loads(ws.recv(timeout=3))
            step("greeting status frame",
                 greeting["op"] == "status" and greeting["level"] == "none")

            r = s.call("/ui/login", {"username": "operator",
                                     "password": "operator-pass"})
            step("operator login", r["result"] and r["values"]["role"] == "operator")
            r = s.call("/ui/set_config", {"changes": []})
            step("operator set_config forbidden",
                 r["result"] is False and "Forbidden" in r["values"]["error"])
            r = s.call("/ui/launch_nodes", {"units": ["vision_camera"]})
            step("operator launch of admin-only module forbidden",
                 r["result"] is False and "Forbidden" in r["values"]["error"])

            r = s.call("/ui/login", {"username": "admin", "password": "admin-pass"})
            step("admin login", r["result"] and r["values"]["role"] == "administrator")
            token = r["values"]["token"]

            r = s.call("/ui/get_platform_config")
            step("platform config served",
                 r["result"] and "launchers" in r["values"]["features"])

            for topic, extra in [("/ui/module_states", {}),
                                 ("/ui/operation_mode", {}),
                                 ("/safety/alarms", {}),
                                 ("/process/current_op", {}),
                                 ("/ui/logs", {}),
                                 ("/sensors/force_left",
                                  {"throttle_rate": 200, "queue_length": 1})]:
                ws.send(json.dumps({"op": "subscribe", "topic": topic, **extra}))
            s.drain(0.2)

            r = s.call("/ui/launch_nodes", {"units": ["process_core"],
                                            "token": token})
            step("module launch accepted",
                 r["result"] and r["values"]["outcomes"][0]["status"] == "started")
            deadline = time.time() + 5
            seen = set()
            while time.time() < deadline:
                s.pump(timeout=0.2)
                seen = {m["state"] for msg in s.topic("/ui/module_states")
                        for m in msg["modules"] if m["name"] == "Process control"}
                if "active" in seen:
                    break
            step("module went gray->orange->green",
                 {"transitioning", "active"} <= seen, str(sorted(seen)))

            s.call("/process/disable_motion")
            ws.send(json.dumps({"op": "publish", "topic": "/process/cmd/start",
                                "msg": {}}))
            deadline = time.time() + 5
            while time.time() < deadline:
                s.pump(timeout=0.2)
                ops = [m["index"] for m in s.topic("/process/current_op")]
                if sorted(set(ops)) == [0, 1, 2, 3, 4]:
                    break
            step("process ran operations 0..4 in order",
                 sorted(set(ops)) == [0, 1, 2, 3, 4], str(ops))
            modes = [m["mode"] for m in s.topic("/ui/operation_mode")]
            step("operation mode showed running", "running" in modes, str(modes))

            sensor_frames = len(s.topic("/sensors/force_left"))
            step("throttled sensor stream alive", sensor_frames > 0,
                 f"{sensor_frames} frames")

            platform.alarms.raise_alarm("E_STOP", "emergency stop pressed")
            s.drain(0.4)
            alarm_msgs = s.topic("/safety/alarms")
            step("alarm visible on socket",
                 any(a["id"] == "E_STOP" for msg in alarm_msgs
                     for a in msg["alarms"]))
            modes = [m["mode"] for m in s.topic("/ui/operation_mode")]
            step("operation mode flipped to alarm", "alarm" in modes, str(modes))
            platform.alarms.clear_condition("E_STOP")
            ws.send(json.dumps({"op": "publish", "topic": "/safety/reset",
                                "msg": {}}))
            s.drain(0.4)
            step("reset cleared inactive alarm", platform.alarms.snapshot() == [])

            ws.send("garbage{{{")
            deadline = time.time() + 2
            got_error = False
            while time.time() < deadline:
                frame = s.pump(timeout=0.5)
                if (frame and frame.get("op") == "status"
                        and frame.get("level") == "error"):
                    got_error = True
                    break
            step("malformed frame answered with status error", got_error)
            r = s.call("/robot/get_groups")
            step("connection still alive after bad frame",
                 r["result"] is True
                 and r["values"]["groups"] == ["arm_left", "arm_right"])
    finally:
        platform.shutdown()
    print("RESULT:", "FAIL " + str(failures) if failures else "all checks passed")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
