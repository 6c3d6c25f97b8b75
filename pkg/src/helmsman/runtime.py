"""Boot wiring: assemble the platform from a PlatformConfig.

Only the nodes and services of enabled features start; the bus, bridge,
operation-mode tracker and robot core are always present.
"""

from __future__ import annotations

import logging

from helmsman.bridge.server import BridgeServer
from helmsman.bridge.ws import WebSocketBridge
from helmsman.bus import MessageBus
from helmsman.clock import WallClock
from helmsman.config import PlatformConfig, ui_view
from helmsman.modmgr import ModuleManager
from helmsman.platform.auth import AuthService
from helmsman.platform.configstore import ConfigStore
from helmsman.platform.dbupdate import DatabaseUpdater
from helmsman.platform.opmode import OperationModeTracker
from helmsman.platform.routines import RoutineStore
from helmsman.procexec import ProcessClient, ProcessDefinition, ProcessServer
from helmsman.robotsim.alarms import AlarmManager
from helmsman.robotsim.robot import MotionGate, RobotSim
from helmsman.robotsim.streams import SensorStreams, VideoStreams

logger = logging.getLogger(__name__)


class Platform:
    def __init__(self, config: PlatformConfig, clock=None, serve: bool = False,
                 host: str = "0.0.0.0"):
        self.config = config
        self._owns_clock = clock is None
        self.clock = clock if clock is not None else WallClock()
        self.bus = MessageBus(self.clock)
        features = config.features

        self.motion_gate = MotionGate(enabled=config.motion_enabled_at_boot)
        self.robot = RobotSim(self.clock, config.robot_fixture,
                              motion_gate=self.motion_gate)
        self.robot.attach(self.bus,
                          register_motion_services="manual" in features)

        self.opmode = OperationModeTracker()
        self.alarms = AlarmManager(
            self.clock,
            on_change=lambda alarms, active: self.opmode.set_alarm_active(active))
        if "alarms" in features:
            self.alarms.attach(self.bus)
        self.opmode.attach(self.bus)

        self.auth: AuthService | None = None
        if "security" in features:
            kwargs = {}
            if config.auth_iterations:
                kwargs["iterations"] = config.auth_iterations
            self.auth = AuthService(config.users_file, **kwargs)
            self.auth.attach(self.bus)

        self.modmgr: ModuleManager | None = None
        if "launchers" in features:
            self.modmgr = ModuleManager(self.bus, self.clock, config.modules,
                                        config.launch_units, auth=self.auth)
            self.modmgr.start()

        self.sensors: SensorStreams | None = None
        if "sensors" in features and config.sensor_graphs:
            self.sensors = SensorStreams(self.bus, self.clock, config.sensor_graphs)
            self.sensors.start()

        self.video: VideoStreams | None = None
        if "video" in features and config.video_streams:
            self.video = VideoStreams(self.bus, self.clock, config.video_streams,
                                      robot=self.robot)
            self.video.start()

        self.config_store: ConfigStore | None = None
        if "config" in features:
            self.config_store = ConfigStore(config.config_csv, config.config_params)
            self.config_store.attach(self.bus, auth=self.auth)

        self.proc_server: ProcessServer | None = None
        self.proc_client: ProcessClient | None = None
        if "auto" in features:
            definition = ProcessDefinition.from_file(config.process_definition_path)
            self.proc_server = ProcessServer(self.bus, self.clock, self.robot,
                                             self.motion_gate, definition,
                                             alarms=self.alarms)
            self.proc_client = ProcessClient(self.bus, self.clock, self.motion_gate,
                                             definition,
                                             panel_fields=config.panel_fields,
                                             on_mode_change=self.opmode.set_exec_mode)
            self.proc_server.start()
            self.proc_client.start()

        self.routines: RoutineStore | None = None
        if "record" in features:
            self.routines = RoutineStore(
                config.routines_dir, self.robot, self.motion_gate, self.clock,
                on_recording_change=self.opmode.set_recording_open)
            self.routines.attach(self.bus, auth=self.auth)

        self.database: DatabaseUpdater | None = None
        if "database" in features:
            self.database = DatabaseUpdater(config.database_dir,
                                            config.database_whitelist,
                                            config.usb_mount_root)
            self.database.attach(self.bus, auth=self.auth)

        self.bus.register_node("platform_info")
        self.bus.register_service(
            "platform_info", "/ui/get_platform_config",
            lambda req: ui_view(config))

        self.bridge = BridgeServer(self.bus, self.clock,
                                   gated_services=config.gated_services())
        self.ws: WebSocketBridge | None = None
        if serve:
            self.ws = WebSocketBridge(self.bridge, host=host, port=config.port)
            self.ws.start()
            logger.info("bridge listening on ws://%s:%s", host, self.ws.port)

    @property
    def port(self) -> int | None:
        return self.ws.port if self.ws is not None else None

    def shutdown(self) -> None:
        if self.ws is not None:
            self.ws.stop()
            self.ws = None
        else:
            self.bridge.close_all()
        if self.sensors is not None:
            self.sensors.stop()
        if self.video is not None:
            self.video.stop()
        if self.modmgr is not None:
            self.modmgr.shutdown()
        if self._owns_clock:
            self.clock.close()


def boot(config: PlatformConfig, clock=None, serve: bool = False,
         host: str = "0.0.0.0") -> Platform:
    platform = Platform(config, clock=clock, serve=serve, host=host)
    features = ", ".join(sorted(config.features)) or "(none)"
    where = f"ws://{host}:{platform.port}" if serve else "in-process"
    print(f"helmsman ready: {where} features: {features}", flush=True)
    return platform
