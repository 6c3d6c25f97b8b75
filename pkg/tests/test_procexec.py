import time

import pytest

from helmsman.bus import HandlerFault, MessageBus
from helmsman.clock import SimClock, WallClock
from helmsman.procexec import (
    COMMANDS,
    FAULT,
    IDLE,
    MODES,
    PAUSED,
    RUNNING,
    STEPPING,
    STOPPED,
    NoProcess,
    Operation,
    ProcessClient,
    ProcessDefinition,
    ProcessServer,
    UnknownField,
)
from helmsman.robotsim import MotionGate, RobotSim
from helmsman.robotsim.alarms import AlarmManager
from tests.conftest import collect_topic, robot_fixture_dict


def wait_ops(n=3, ms=1000):
    return ProcessDefinition(name="waits", operations=[
        Operation(index=i, label=f"op{i}", steps=[{"kind": "wait", "ms": ms}])
        for i in range(n)
    ])


def move_ops():
    return ProcessDefinition(name="demo", operations=[
        Operation(index=0, label="approach", steps=[
            {"kind": "move_to", "group": "arm_left",
             "target": {"type": "named", "name": "pick"}, "speed": 0.5,
             "accel": 1.0},
        ]),
        Operation(index=1, label="grip", steps=[
            {"kind": "actuate", "arm": "arm_left", "tool": "gripper",
             "action": "close"},
        ]),
        Operation(index=2, label="retreat", steps=[
            {"kind": "move_to", "group": "arm_left",
             "target": {"type": "named", "name": "home"}, "speed": 0.5,
             "accel": 1.0},
        ]),
    ])


class Env:
    def __init__(self, definition, clock=None, panel_fields=None, fail_step=False):
        self.clock = clock or SimClock()
        self.bus = MessageBus(self.clock)
        self.gate = MotionGate(enabled=True)
        self.robot = RobotSim(self.clock, robot_fixture_dict(), motion_gate=self.gate)
        self.robot.attach(self.bus)
        self.alarms = AlarmManager(self.clock)
        self.server = ProcessServer(self.bus, self.clock, self.robot, self.gate,
                                    definition, alarms=self.alarms)
        self.client = ProcessClient(self.bus, self.clock, self.gate, definition,
                                    panel_fields=panel_fields)
        self.server.start()
        self.client.start()
        self.current = collect_topic(self.bus, "/process/current_op")
        self.logs = collect_topic(self.bus, "/ui/logs")

    def indices(self):
        return [m.payload["index"] for m in self.current]


def failing_definition():
    # speed over the limit: the move step raises at dispatch -> fault
    return ProcessDefinition(name="bad", operations=[
        Operation(index=0, label="too_fast", steps=[
            {"kind": "move_to", "group": "arm_left",
             "target": {"type": "named", "name": "pick"}, "speed": 99.0},
        ]),
    ])


def make_env_in_mode(mode: str) -> Env:
    """Drive a fresh executor into the requested steady mode."""
    if mode == FAULT:
        env = Env(failing_definition())
        assert env.client.command("start")
        assert env.client.mode == FAULT
        return env
    env = Env(wait_ops(n=5, ms=10_000))
    if mode == IDLE:
        return env
    if mode == RUNNING:
        assert env.client.command("start")
    elif mode == PAUSED:
        assert env.client.command("start")
        assert env.client.command("pause")
        env.clock.advance(10_000)  # op 0's wait elapses; server parks
        assert env.client.mode == PAUSED
    elif mode == STEPPING:
        assert env.client.command("step", index=1)
    elif mode == STOPPED:
        assert env.client.command("start")
        assert env.client.command("stop")
    assert env.client.mode == mode
    return env


# Legal-transition oracle: (mode, command) -> mode after acceptance,
# or None when the command must be refused.
#   start: idle/stopped; pause: running; resume: paused; stop: any
#   non-idle; step(i): idle/stopped/paused with no operation in flight.
LEGAL = {
    (IDLE, "start"): RUNNING,
    (IDLE, "stop"): None,
    (IDLE, "pause"): None,
    (IDLE, "resume"): None,
    (IDLE, "step"): STEPPING,
    (RUNNING, "start"): None,
    (RUNNING, "stop"): STOPPED,
    (RUNNING, "pause"): PAUSED,
    (RUNNING, "resume"): None,
    (RUNNING, "step"): None,
    (PAUSED, "start"): None,
    (PAUSED, "stop"): STOPPED,
    (PAUSED, "pause"): None,
    (PAUSED, "resume"): RUNNING,
    (PAUSED, "step"): STEPPING,
    (STEPPING, "start"): None,
    (STEPPING, "stop"): STOPPED,
    (STEPPING, "pause"): None,
    (STEPPING, "resume"): None,
    (STEPPING, "step"): None,
    (STOPPED, "start"): RUNNING,
    (STOPPED, "stop"): STOPPED,
    (STOPPED, "pause"): None,
    (STOPPED, "resume"): None,
    (STOPPED, "step"): STEPPING,
    (FAULT, "start"): None,
    (FAULT, "stop"): STOPPED,
    (FAULT, "pause"): None,
    (FAULT, "resume"): None,
    (FAULT, "step"): None,
}


class TestModeMachine:
    @pytest.mark.parametrize("mode,cmd", [(m, c) for m in MODES for c in COMMANDS])
    def test_all_thirty_pairs(self, mode, cmd):
        env = make_env_in_mode(mode)
        expected = LEGAL[(mode, cmd)]
        accepted = env.client.command(cmd, index=2)
        if expected is None:
            assert accepted is False
            assert env.client.mode == mode
        else:
            assert accepted is True
            assert env.client.mode == expected

    def test_start_while_running_logs_already_running(self):
        env = make_env_in_mode(RUNNING)
        env.client.command("start")
        assert any("already running" in m.payload["text"] for m in env.logs)


class TestSequentialRun:
    def test_full_run_indices_exact(self):
        env = Env(wait_ops(n=5, ms=100))
        env.client.command("start")
        env.clock.advance(1_000)
        assert env.indices() == [0, 1, 2, 3, 4]
        assert env.client.mode == IDLE

    def test_instant_steps_run_synchronously(self):
        env = Env(move_ops())
        env.client.set_motion_enabled(False)  # dry-run: moves skip
        env.client.command("start")
        assert env.indices() == [0, 1, 2]
        assert env.client.mode == IDLE

    def test_real_moves_through_robot(self):
        env = Env(move_ops())
        env.client.command("start")
        assert env.client.mode == RUNNING
        env.clock.advance(60_000)
        assert env.client.mode == IDLE
        assert env.indices() == [0, 1, 2]
        assert env.robot.tool_state("arm_left", "gripper") == "closed"
        final = env.robot.get_pose("arm_left")
        assert list(final.position) == [0.3, 0.4, 0.5]

    def test_step_executes_one_then_restores(self):
        env = Env(wait_ops(n=5, ms=200))
        env.client.command("step", index=4)
        assert env.client.mode == STEPPING
        assert env.indices() == [4]
        env.clock.advance(200)
        assert env.client.mode == IDLE
        assert env.indices() == [4]

    def test_step_from_paused_returns_to_paused(self):
        env = make_env_in_mode(PAUSED)  # paused at op-0 boundary
        before = list(env.indices())
        assert env.client.command("step", index=4)
        assert env.client.mode == STEPPING
        env.clock.advance(10_000)
        assert env.client.mode == PAUSED
        assert env.indices() == before + [4]

    def test_pause_publishes_no_indices_until_resume(self):
        env = Env(wait_ops(n=3, ms=1_000))
        env.client.command("start")
        env.client.command("pause")
        published_at_pause = len(env.current)
        env.clock.advance(30_000)
        assert len(env.current) == published_at_pause
        env.client.command("resume")
        env.clock.advance(30_000)
        assert env.indices() == [0, 1, 2]
        assert env.client.mode == IDLE

    def test_stop_cancels_inflight_motion_quickly(self):
        env = Env(move_ops())
        env.client.command("start")
        env.clock.advance(300)
        assert env.robot.is_moving("arm_left")
        env.client.command("stop")
        assert env.client.mode == STOPPED
        # within one motion-progress period (100 ms simulated)
        env.clock.advance(100)
        assert not env.robot.is_moving("arm_left")

    def test_restart_after_stop_runs_from_zero(self):
        env = Env(wait_ops(n=3, ms=100))
        env.client.command("start")
        env.clock.advance(150)
        env.client.command("stop")
        env.clock.advance(500)
        env.client.command("start")
        env.clock.advance(1_000)
        assert env.indices()[-3:] == [0, 1, 2]

    def test_fault_requires_stop_before_start(self):
        env = make_env_in_mode(FAULT)
        assert env.client.command("start") is False
        assert env.client.command("stop") is True
        assert env.client.command("start") is True


class TestMotionEnable:
    def test_disabled_runs_dry_fast_wall_clock(self):
        clock = WallClock()
        env = Env(move_ops(), clock=clock)
        env.client.set_motion_enabled(False)
        t0 = time.monotonic()
        env.client.command("start")
        deadline = time.monotonic() + 2.0
        while env.client.mode != IDLE and time.monotonic() < deadline:
            time.sleep(0.002)
        elapsed = time.monotonic() - t0
        assert env.client.mode == IDLE
        assert elapsed < 0.1
        clock.close()

    def test_enabled_takes_trapezoid_time_wall_clock(self):
        clock = WallClock()
        definition = ProcessDefinition(name="short", operations=[
            Operation(index=0, label="nudge", steps=[
                {"kind": "move_to", "group": "arm_left",
                 "target": {"type": "relative",
                            "delta": {"position": [0.02, 0, 0],
                                      "orientation": [0, 0, 0]}},
                 "speed": 0.5, "accel": 2.0},
            ]),
        ])
        env = Env(definition, clock=clock)
        t0 = time.monotonic()
        env.client.command("start")
        deadline = time.monotonic() + 3.0
        while env.client.mode != IDLE and time.monotonic() < deadline:
            time.sleep(0.002)
        elapsed = time.monotonic() - t0
        # triangle: 2*sqrt(0.02/2) = 0.2 s
        assert env.client.mode == IDLE
        assert 0.1 < elapsed < 1.0
        clock.close()

    def test_toggle_echoed_in_panel(self):
        env = Env(wait_ops())
        panel = collect_topic(env.bus, "/ui/status_panel")
        env.client.set_motion_enabled(False)
        assert panel[-1].payload["fields"]["motion_enabled"] is False

    def test_services(self):
        env = Env(wait_ops())
        assert env.bus.call_service("/process/disable_motion", {}) == {
            "motion_enabled": False}
        assert env.gate.enabled is False
        assert env.bus.call_service("/process/enable_motion", {}) == {
            "motion_enabled": True}
        assert env.gate.enabled is True


class TestServicesAndPanels:
    def test_get_operations(self):
        env = Env(wait_ops(n=3))
        response = env.bus.call_service("/process/get_operations", {})
        assert [o["label"] for o in response["operations"]] == ["op0", "op1", "op2"]

    def test_get_operations_no_process(self):
        env = Env(wait_ops())
        env.client.load(None)
        with pytest.raises(HandlerFault) as exc_info:
            env.bus.call_service("/process/get_operations", {})
        assert isinstance(exc_info.value.cause, NoProcess)

    def test_reload_definition(self):
        env = Env(wait_ops(n=3))
        env.client.load(wait_ops(n=5))
        response = env.bus.call_service("/process/get_operations", {})
        assert len(response["operations"]) == 5

    def test_log_feedback(self):
        env = Env(wait_ops())
        env.client.publish_feedback("log", {"text": "Motion OK"})
        assert env.logs[-1].payload["text"] == "Motion OK"
        assert "stamp" in env.logs[-1].payload

    def test_status_merge_update(self):
        env = Env(wait_ops(), panel_fields=[
            {"id": "robot_speed", "display_name": "Robot speed", "default": 0.0},
            {"id": "total_time_ms", "display_name": "Total time", "default": 0},
        ])
        panel = collect_topic(env.bus, "/ui/status_panel")
        env.client.publish_feedback("status", {"robot_speed": 0.25})
        fields = panel[-1].payload["fields"]
        assert fields["robot_speed"] == 0.25
        assert fields["total_time_ms"] == 0

    def test_unknown_field_rejected(self):
        env = Env(wait_ops(), panel_fields=[{"id": "robot_speed", "default": 0}])
        with pytest.raises(UnknownField):
            env.client.publish_feedback("status", {"nonexistent": 1})

    def test_total_time_published_on_completion(self):
        env = Env(wait_ops(n=2, ms=500), panel_fields=[
            {"id": "total_time_ms", "display_name": "Total time", "default": 0}])
        panel = collect_topic(env.bus, "/ui/status_panel")
        env.client.command("start")
        env.clock.advance(2_000)
        assert env.client.mode == IDLE
        assert panel[-1].payload["fields"]["total_time_ms"] == pytest.approx(
            1_000.0, abs=1.0)

    def test_cmd_topics_drive_machine(self):
        env = Env(wait_ops(n=2, ms=100))
        from tests.conftest import publish_as
        publish_as(env.bus, "ui", "/process/cmd/start", {})
        assert env.client.mode == RUNNING
        publish_as(env.bus, "ui", "/process/cmd/stop", {})
        assert env.client.mode == STOPPED
        publish_as(env.bus, "ui", "/process/cmd/step", {"index": 1})
        assert env.client.mode == STEPPING
        env.clock.advance(100)
        assert env.client.mode == STOPPED

    def test_alarm_step_raises_alarm(self):
        definition = ProcessDefinition(name="alarming", operations=[
            Operation(index=0, label="trip", steps=[
                {"kind": "raise_alarm", "id": "E42", "text": "belt jam"}])])
        env = Env(definition)
        env.client.command("start")
        assert env.alarms.any_active()


class TestDefinitionValidation:
    def test_empty_operations(self):
        with pytest.raises(ValueError):
            ProcessDefinition(name="x", operations=[])

    def test_gap_in_indices(self):
        with pytest.raises(ValueError):
            ProcessDefinition(name="x", operations=[
                Operation(index=0, label="a"), Operation(index=2, label="b")])

    def test_duplicate_labels(self):
        with pytest.raises(ValueError):
            ProcessDefinition(name="x", operations=[
                Operation(index=0, label="a"), Operation(index=1, label="a")])
