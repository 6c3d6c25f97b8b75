import itertools

import pytest

from helmsman.bus import HandlerFault, MessageBus
from helmsman.clock import SimClock
from helmsman.modmgr import (
    ACTIVE,
    INACTIVE,
    INCOMPLETE,
    PENDING_LAUNCHING,
    PENDING_NONE,
    PENDING_STOPPING,
    TRANSITIONING,
    LaunchUnit,
    ModuleManager,
    ModuleSpec,
    ModuleState,
    compute_state,
)
from tests.conftest import collect_topic

T = 15_000.0


def spec_ab():
    return ModuleSpec(name="vision", launch_units=["vision_unit"],
                      expected_nodes=["a", "b"])


# Exhaustive truth-table oracle, transcribed case by case:
#   A class x pending x elapsed -> (state, pending-after)
# A=N settles a launch; A=0 settles a stop; an unsettled request is
# transitioning within the timeout and incomplete beyond it; with no
# request pending the state is pure observation.
ORACLE = {
    ("zero", "none", "within"): (INACTIVE, PENDING_NONE),
    ("zero", "none", "beyond"): (INACTIVE, PENDING_NONE),
    ("partial", "none", "within"): (INCOMPLETE, PENDING_NONE),
    ("partial", "none", "beyond"): (INCOMPLETE, PENDING_NONE),
    ("full", "none", "within"): (ACTIVE, PENDING_NONE),
    ("full", "none", "beyond"): (ACTIVE, PENDING_NONE),
    ("zero", "launching", "within"): (TRANSITIONING, PENDING_LAUNCHING),
    ("zero", "launching", "beyond"): (INCOMPLETE, PENDING_NONE),
    ("partial", "launching", "within"): (TRANSITIONING, PENDING_LAUNCHING),
    ("partial", "launching", "beyond"): (INCOMPLETE, PENDING_NONE),
    ("full", "launching", "within"): (ACTIVE, PENDING_NONE),
    ("full", "launching", "beyond"): (ACTIVE, PENDING_NONE),
    ("zero", "stopping", "within"): (INACTIVE, PENDING_NONE),
    ("zero", "stopping", "beyond"): (INACTIVE, PENDING_NONE),
    ("partial", "stopping", "within"): (TRANSITIONING, PENDING_STOPPING),
    ("partial", "stopping", "beyond"): (INCOMPLETE, PENDING_NONE),
    ("full", "stopping", "within"): (TRANSITIONING, PENDING_STOPPING),
    ("full", "stopping", "beyond"): (INCOMPLETE, PENDING_NONE),
}

LIVE_SETS = {"zero": set(), "partial": {"a"}, "full": {"a", "b"}}
ELAPSED = {"within": 2_000.0, "beyond": T + 1.0}


class TestComputeState:
    @pytest.mark.parametrize(
        "alive,pending,elapsed",
        list(itertools.product(LIVE_SETS, ["none", "launching", "stopping"], ELAPSED)),
    )
    def test_truth_table(self, alive, pending, elapsed):
        prev = ModuleState(value=TRANSITIONING if pending != "none" else INACTIVE,
                           pending=pending, pending_since=1_000.0)
        now = 1_000.0 + ELAPSED[elapsed]
        got = compute_state(spec_ab(), LIVE_SETS[alive], prev, now, timeout_ms=T)
        want_value, want_pending = ORACLE[(alive, pending, elapsed)]
        assert (got.value, got.pending) == (want_value, want_pending)

    def test_spec_examples(self):
        spec = spec_ab()
        assert compute_state(spec, {"a", "b"}, ModuleState(), 0.0).value == ACTIVE
        assert compute_state(spec, {"a"}, ModuleState(), 0.0).value == INCOMPLETE
        launching = ModuleState(INACTIVE, PENDING_LAUNCHING, pending_since=0.0)
        assert compute_state(spec, {"a"}, launching, 2_000.0).value == TRANSITIONING

    def test_boundary_elapsed_equal_timeout_still_transitioning(self):
        launching = ModuleState(INACTIVE, PENDING_LAUNCHING, pending_since=0.0)
        got = compute_state(spec_ab(), set(), launching, T, timeout_ms=T)
        assert got.value == TRANSITIONING

    def test_fixed_point_without_pending(self):
        spec = spec_ab()
        for live in (set(), {"a"}, {"a", "b"}):
            once = compute_state(spec, live, ModuleState(), 5.0)
            twice = compute_state(spec, live, once, 6.0)
            assert (once.value, once.pending) == (twice.value, twice.pending)

    def test_timeout_is_terminal_without_new_request(self):
        spec = spec_ab()
        state = ModuleState(TRANSITIONING, PENDING_LAUNCHING, pending_since=0.0)
        state = compute_state(spec, {"a"}, state, T + 1.0)
        assert state.value == INCOMPLETE
        for now in (T + 2.0, T + 500.0, T + 50_000.0):
            state = compute_state(spec, {"a"}, state, now)
            assert state.value != TRANSITIONING

    def test_external_node_kill_absorbed(self):
        # user kills a node from the terminal: observation wins
        spec = spec_ab()
        state = compute_state(spec, {"a", "b"}, ModuleState(), 0.0)
        assert state.value == ACTIVE
        state = compute_state(spec, {"a"}, state, 1_000.0)
        assert state.value == INCOMPLETE


@pytest.fixture
def manager_env():
    clock = SimClock()
    bus = MessageBus(clock)
    units = [
        LaunchUnit(id="vision_unit", nodes_started=["a", "b"], startup_delay_ms=0),
        LaunchUnit(id="slow_unit", nodes_started=["c"], startup_delay_ms=2_500),
        LaunchUnit(id="broken_unit", nodes_started=["d"], fail_mode="never_starts"),
        LaunchUnit(id="dying_unit", nodes_started=["e"], startup_delay_ms=0,
                   fail_mode="dies_after_ms", fail_after_ms=4_000),
    ]
    modules = [
        ModuleSpec(name="vision", launch_units=["vision_unit"],
                   expected_nodes=["a", "b"]),
        ModuleSpec(name="slow", launch_units=["slow_unit"], expected_nodes=["c"]),
        ModuleSpec(name="broken", launch_units=["broken_unit"], expected_nodes=["d"]),
        ModuleSpec(name="dying", launch_units=["dying_unit"], expected_nodes=["e"]),
    ]
    manager = ModuleManager(bus, clock, modules, units)
    manager.start()
    return clock, bus, manager


class TestLaunchStop:
    def test_launch_registers_nodes(self, manager_env):
        clock, bus, manager = manager_env
        outcomes = manager.launch(["vision_unit"])
        assert outcomes == [{"unit": "vision_unit", "status": "started"}]
        assert {"a", "b"} <= bus.list_nodes()
        assert manager.states()["vision"].value == ACTIVE

    def test_launch_twice_already_launched(self, manager_env):
        clock, bus, manager = manager_env
        manager.launch(["vision_unit"])
        count = len(bus.list_nodes())
        outcomes = manager.launch(["vision_unit"])
        assert outcomes[0]["status"] == "already_launched"
        assert len(bus.list_nodes()) == count

    def test_unknown_unit(self, manager_env):
        _, _, manager = manager_env
        outcomes = manager.launch(["ghost_unit"])
        assert outcomes[0]["status"] == "error"

    def test_slow_launch_transitions_then_active(self, manager_env):
        clock, bus, manager = manager_env
        manager.launch(["slow_unit"])
        assert manager.states()["slow"].value == TRANSITIONING
        clock.advance(1_000)
        assert manager.states()["slow"].value == TRANSITIONING
        clock.advance(2_000)  # node registers at 2.5 s; poller sees it
        assert manager.states()["slow"].value == ACTIVE

    def test_never_starts_reaches_incomplete_after_timeout(self, manager_env):
        clock, bus, manager = manager_env
        manager.launch(["broken_unit"])
        assert manager.states()["broken"].value == TRANSITIONING
        clock.advance(T + 1_500)
        assert manager.states()["broken"].value == INCOMPLETE
        # simulated-clock oracle: after pending clears it settles observed
        clock.advance(2_000)
        assert manager.states()["broken"].value == INACTIVE

    def test_dying_node_flips_module_incomplete_then_inactive(self, manager_env):
        clock, bus, manager = manager_env
        manager.launch(["dying_unit"])
        assert manager.states()["dying"].value == ACTIVE
        clock.advance(5_000)
        assert manager.states()["dying"].value == INACTIVE

    def test_stop_running_unit(self, manager_env):
        clock, bus, manager = manager_env
        manager.launch(["vision_unit"])
        outcomes = manager.stop(["vision_unit"])
        assert outcomes[0]["status"] == "stopped"
        assert not ({"a", "b"} & bus.list_nodes())
        assert manager.states()["vision"].value == INACTIVE

    def test_stop_not_running(self, manager_env):
        _, _, manager = manager_env
        assert manager.stop(["vision_unit"])[0]["status"] == "not_running"

    def test_half_module_stopped_is_incomplete(self):
        clock = SimClock()
        bus = MessageBus(clock)
        units = [LaunchUnit(id="u1", nodes_started=["a"]),
                 LaunchUnit(id="u2", nodes_started=["b"])]
        modules = [ModuleSpec(name="m", launch_units=["u1", "u2"],
                              expected_nodes=["a", "b"])]
        manager = ModuleManager(bus, clock, modules, units)
        manager.start()
        manager.launch(["u1", "u2"])
        assert manager.states()["m"].value == ACTIVE
        manager.stop(["u1"])
        # stopping pending: transitioning until timeout, then incomplete
        assert manager.states()["m"].value == TRANSITIONING
        clock.advance(T + 1_500)
        assert manager.states()["m"].value == INCOMPLETE

    def test_services_over_bus(self, manager_env):
        clock, bus, manager = manager_env
        response = bus.call_service("/ui/launch_nodes", {"units": ["vision_unit"]})
        assert response["outcomes"][0]["status"] == "started"
        response = bus.call_service("/ui/stop_nodes", {"units": ["vision_unit"]})
        assert response["outcomes"][0]["status"] == "stopped"


class TestPolling:
    def test_change_driven_publishing(self, manager_env):
        clock, bus, manager = manager_env
        states = collect_topic(bus, "/ui/module_states")
        clock.advance(3_000)  # three quiet ticks: nothing changed
        quiet = [m for m in states if not m.payload["full"]]
        assert quiet == []

    def test_external_kill_publishes_one_flip(self, manager_env):
        clock, bus, manager = manager_env
        manager.launch(["vision_unit"])
        states = collect_topic(bus, "/ui/module_states")
        bus.deregister_node("a")
        clock.advance(1_000)
        flips = [entry for m in states for entry in m.payload["modules"]
                 if entry["name"] == "vision"]
        assert flips[-1]["state"] == INCOMPLETE

    def test_three_modules_killed_in_one_tick(self):
        clock = SimClock()
        bus = MessageBus(clock)
        units = [LaunchUnit(id=f"u{i}", nodes_started=[f"n{i}"]) for i in range(3)]
        modules = [ModuleSpec(name=f"m{i}", launch_units=[f"u{i}"],
                              expected_nodes=[f"n{i}"]) for i in range(3)]
        manager = ModuleManager(bus, clock, modules, units)
        manager.start()
        manager.launch(["u0", "u1", "u2"])
        for i in range(3):
            bus.deregister_node(f"n{i}")
        changes = manager.poll_now()
        # oracle counting flips: all three modules flip in the same tick
        assert sorted(name for name, _ in changes) == ["m0", "m1", "m2"]
        assert all(s.value == INACTIVE for _, s in changes)

    def test_full_snapshot_every_ten_ticks(self, manager_env):
        clock, bus, manager = manager_env
        states = collect_topic(bus, "/ui/module_states")
        clock.advance(10_000)
        fulls = [m for m in states if m.payload["full"]]
        assert len(fulls) >= 1
        assert len(fulls[0].payload["modules"]) == 4

    def test_launch_busy_lockout(self, manager_env):
        clock, bus, manager = manager_env
        busy = collect_topic(bus, "/ui/launch_busy")
        manager.launch(["slow_unit"])
        assert busy[-1].payload["busy"] is True
        clock.advance(3_000)
        assert busy[-1].payload["busy"] is False


class TestValidation:
    def test_node_in_two_units_rejected(self):
        clock = SimClock()
        bus = MessageBus(clock)
        units = [LaunchUnit(id="u1", nodes_started=["a"]),
                 LaunchUnit(id="u2", nodes_started=["a"])]
        modules = [ModuleSpec(name="m", launch_units=["u1", "u2"],
                              expected_nodes=["a"])]
        with pytest.raises(ValueError):
            ModuleManager(bus, clock, modules, units)

    def test_empty_expected_nodes_rejected(self):
        with pytest.raises(ValueError):
            ModuleSpec(name="m", launch_units=["u"], expected_nodes=[])
