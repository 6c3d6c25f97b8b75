"""Backend under test for the dashboard's end-to-end suite.

Boots the platform with the WebSocket bridge on the given port, then
executes safety-node events fed through stdin so the test harness can
raise and clear alarm conditions deterministically:

    raise <id> [text...]
    clear <id>
    exit
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from helmsman.config import load_platform_config
from helmsman.runtime import boot


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--config", required=True)
    parser.add_argument("--port", type=int, required=True)
    args = parser.parse_args()

    config = load_platform_config(args.config, port_override=args.port)
    platform = boot(config, serve=True, host="127.0.0.1")
    try:
        for line in sys.stdin:
            parts = line.strip().split(maxsplit=2)
            if not parts:
                continue
            if parts[0] == "exit":
                break
            try:
                if parts[0] == "raise":
                    platform.alarms.raise_alarm(
                        parts[1], parts[2] if len(parts) > 2 else "")
                elif parts[0] == "clear":
                    platform.alarms.clear_condition(parts[1])
                print(f"ack {parts[0]} {parts[1]}", flush=True)
            except Exception as exc:
                print(f"err {exc}", flush=True)
    finally:
        platform.shutdown()
    return 0


if __name__ == "__main__":
    sys.exit(main())
