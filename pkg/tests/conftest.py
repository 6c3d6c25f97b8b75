import json
import shutil
import threading
from pathlib import Path

import pytest

from helmsman.bus import MessageBus
from helmsman.clock import SimClock
from helmsman.config import load_platform_config

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def make_test_config(tmp_path, features=None, mutate=None, port=0):
    """Copy the shipped fixture tree into tmp and load a config from it,
    so tests never write into the repo's fixtures."""
    for name in ("platform.json", "robot.json", "process.json"):
        shutil.copy(FIXTURES / name, tmp_path / name)
    shutil.copytree(FIXTURES / "data", tmp_path / "data")
    doc = json.loads((tmp_path / "platform.json").read_text())
    if features is not None:
        doc["features"] = list(features)
    doc["bridge"]["port"] = port
    if mutate is not None:
        mutate(doc)
    (tmp_path / "platform.json").write_text(json.dumps(doc))
    return load_platform_config(tmp_path / "platform.json")


@pytest.fixture
def clock():
    return SimClock()

@pytest.fixture
def bus(clock):
    return MessageBus(clock)


def robot_fixture_dict():
    def pose(x, y, z, roll=0.0, pitch=0.0, yaw=0.0):
        return {"position": [x, y, z], "orientation": [roll, pitch, yaw]}

    return {
        "groups": [
            {
                "name": "arm_left",
                "home": "home",
                "named_configs": {
                    "home": pose(0.3, 0.4, 0.5),
                    "pick": pose(0.5, 0.2, 0.2, 0.0, 0.0, 1.0),
                    "place": pose(0.1, -0.2, 0.3),
                },
                "tools": ["gripper", "taping_gun"],
                "attached_tool": "gripper",
                "speed_limit": 1.0,
                "accel_limit": 2.0,
            },
            {
                "name": "arm_right",
                "home": "home",
                "named_configs": {
                    "home": pose(-0.3, 0.4, 0.5),
                    "pick": pose(-0.5, 0.2, 0.2),
                },
                "tools": ["gripper"],
                "attached_tool": "gripper",
                "speed_limit": 0.8,
                "accel_limit": 1.5,
            },
        ]
    }


@pytest.fixture
def robot_fixture():
    return robot_fixture_dict()


def collect_topic(bus, topic, node="test_collector"):
    """Subscribe a list-collecting sink; auto-registers the node once."""
    if node not in bus.list_nodes():
        bus.register_node(node)
    received = []
    bus.subscribe(node, topic, lambda m: received.append(m))
    return received


def publish_as(bus, node, topic, payload, type_name="test/Any"):
    """Publish from a test node, advertising the topic first if needed."""
    if node not in bus.list_nodes():
        bus.register_node(node)
    if not bus.has_topic(topic):
        bus.advertise(node, topic, type_name)
    return bus.publish(node, topic, payload)


def call_in_thread(fn, *args, **kwargs):
    """Run fn in a worker thread; returns (thread, box) where box['value']
    or box['error'] is set on completion. For blocking calls that need the
    test thread free to advance a SimClock."""
    box = {}
    done = threading.Event()

    def run():
        try:
            box["value"] = fn(*args, **kwargs)
        except BaseException as exc:  # noqa: BLE001
            box["error"] = exc
        finally:
            done.set()

    thread = threading.Thread(target=run, daemon=True)
    thread.start()
    box["done"] = done
    return thread, box
