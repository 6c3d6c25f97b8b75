"""Command-line entry point: boot the platform from a config file, serve
the WebSocket bridge, and optionally replay a line-oriented command
script (subscribe / publish / call / expect) for headless demos and CI.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import threading
import time
from pathlib import Path

from helmsman.config import ConfigInvalid, load_platform_config
from helmsman.runtime import boot

logger = logging.getLogger(__name__)


def subset_match(expected, actual) -> bool:
    """True when ``actual`` contains ``expected`` (dicts by keys, lists
    exactly, scalars by equality)."""
    if isinstance(expected, dict):
        return isinstance(actual, dict) and all(
            key in actual and subset_match(value, actual[key])
            for key, value in expected.items())
    if isinstance(expected, list):
        return (isinstance(actual, list) and len(actual) == len(expected)
                and all(subset_match(e, a) for e, a in zip(expected, actual)))
    return expected == actual


class ScriptError(Exception):
    pass


class ScriptRunner:
    """Replays subscribe/publish/call/expect command lines against a
    booted platform; exits nonzero on the first failed expectation."""

    def __init__(self, platform, out=sys.stdout):
        self._platform = platform
        self._bus = platform.bus
        self._out = out
        self._node = "script_runner"
        self._bus.register_node(self._node)
        self._lock = threading.Lock()
        self._captured: dict[str, list] = {}
        self._cursor: dict[str, int] = {}
        self._last_response = None
        self._timeout_ms = 2000.0

    def run_file(self, path: str | Path) -> int:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return self.run_lines(lines)

    def run_lines(self, lines: list[str]) -> int:
        for lineno, raw in enumerate(lines, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                self._execute(line)
            except ScriptError as exc:
                print(f"script:{lineno}: FAIL {line}", file=self._out)
                print(str(exc), file=self._out)
                return 1
            except Exception as exc:  # setup problems, malformed lines
                print(f"script:{lineno}: ERROR {line}\n{exc}", file=self._out)
                return 1
            print(f"script:{lineno}: ok {line}", file=self._out)
        return 0

    def _execute(self, line: str) -> None:
        verb, _, rest = line.partition(" ")
        if verb == "subscribe":
            self._subscribe(rest.strip())
        elif verb == "publish":
            topic, payload = self._split_json(rest)
            if not self._bus.has_topic(topic):
                self._bus.advertise(self._node, topic, "script/Json")
            self._bus.publish(self._node, topic, payload)
        elif verb == "call":
            service, payload = self._split_json(rest)
            try:
                self._last_response = self._bus.call_service(service, payload)
            except Exception as exc:
                self._last_response = {"error": f"{type(exc).__name__}: {exc}"}
        elif verb == "expect":
            target, expected = self._split_json(rest)
            if target == "response":
                if not subset_match(expected, self._last_response):
                    raise ScriptError(self._diff(expected, [self._last_response]))
            else:
                self._expect_topic(target, expected)
        elif verb == "timeout":
            self._timeout_ms = float(rest.strip())
        else:
            raise ValueError(f"unknown script verb {verb!r}")

    def _split_json(self, rest: str) -> tuple[str, dict]:
        target, _, doc = rest.strip().partition(" ")
        if not doc.strip():
            return target, {}
        return target, json.loads(doc)

    def _subscribe(self, topic: str) -> None:
        if topic in self._captured:
            return
        with self._lock:
            self._captured[topic] = []
            self._cursor[topic] = 0
        self._bus.subscribe(
            self._node, topic,
            lambda msg, t=topic: self._capture(t, msg.payload))

    def _capture(self, topic: str, payload) -> None:
        with self._lock:
            self._captured[topic].append(payload)

    def _expect_topic(self, topic: str, expected) -> None:
        if topic not in self._captured:
            raise ScriptError(f"expect on {topic} without a prior subscribe")
        deadline = time.monotonic() + self._timeout_ms / 1000.0
        while True:
            with self._lock:
                messages = list(self._captured[topic])
                start = self._cursor[topic]
            for i in range(start, len(messages)):
                if subset_match(expected, messages[i]):
                    with self._lock:
                        self._cursor[topic] = i + 1
                    return
            if time.monotonic() >= deadline:
                raise ScriptError(self._diff(expected, messages[start:]))
            time.sleep(0.01)

    @staticmethod
    def _diff(expected, received) -> str:
        got = "\n".join(f"  received: {json.dumps(m, sort_keys=True)}"
                        for m in received[-5:]) or "  received: (nothing)"
        return f"  expected: {json.dumps(expected, sort_keys=True)}\n{got}"


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="helmsman",
        description="Operations platform for ROS-style robotic systems: "
                    "pub/sub graph, rosbridge-compatible WebSocket bridge, "
                    "module supervisor, simulated robot backend.")
    parser.add_argument("--config", required=True, help="platform config JSON")
    parser.add_argument("--port", type=int, default=None,
                        help="bridge port (overrides config and HELMSMAN_PORT)")
    parser.add_argument("--host", default="0.0.0.0", help="bridge bind address")
    parser.add_argument("--data-dir", default=None,
                        help="base dir for data stores (or HELMSMAN_DATA_DIR)")
    parser.add_argument("--script", default=None,
                        help="run a command script and exit")
    parser.add_argument("--log-level", default="INFO",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    port = args.port
    if port is None and os.environ.get("HELMSMAN_PORT"):
        port = int(os.environ["HELMSMAN_PORT"])
    data_dir = args.data_dir or os.environ.get("HELMSMAN_DATA_DIR")

    try:
        config = load_platform_config(args.config, port_override=port,
                                      data_dir=data_dir)
    except ConfigInvalid as exc:
        print(f"config invalid: {exc}", file=sys.stderr)
        return 2

    platform = boot(config, serve=args.script is None, host=args.host)
    try:
        if args.script is not None:
            return ScriptRunner(platform).run_file(args.script)
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        print("shutting down")
        return 0
    finally:
        platform.shutdown()


if __name__ == "__main__":
    sys.exit(main())
