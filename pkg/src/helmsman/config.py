"""Platform configuration: the single JSON document that decides which
features start, what the robot looks like, and where every data store
lives. Reconfiguration means editing this file, not code."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from helmsman.bus import validate_topic_name
from helmsman.modmgr import LaunchUnit, ModuleSpec
from helmsman.robotsim.streams import SensorGraphSpec

FEATURES = (
    "security", "launchers", "sensors", "manual", "auto",
    "video", "config", "record", "alarms", "database",
)

DEFAULT_ADMIN_SERVICES = (
    "/ui/set_config", "/routines/record", "/routines/delete",
    "/db/overwrite", "/robot/move",
)


class ConfigInvalid(Exception):
    def __init__(self, field_name: str, reason: str):
        super().__init__(f"{field_name}: {reason}")
        self.field = field_name
        self.reason = reason


@dataclass
class PlatformConfig:
    port: int
    features: set[str]
    modules: list[ModuleSpec]
    launch_units: list[LaunchUnit]
    sensor_graphs: list[SensorGraphSpec]
    video_streams: list[dict]
    robot_fixture: dict
    process_definition_path: Path | None
    panel_fields: list[dict]
    config_params: list[dict]
    config_csv: Path
    users_file: Path
    database_dir: Path
    database_whitelist: list[str]
    usb_mount_root: Path
    routines_dir: Path
    motion_enabled_at_boot: bool = True
    admin_services: list[str] = field(default_factory=list)
    auth_iterations: int | None = None

    def gated_services(self) -> dict[str, str]:
        if "security" not in self.features:
            return {}
        return {name: "administrator" for name in self.admin_services}


def _require(doc: dict, key: str, kind, field_name: str):
    if key not in doc:
        raise ConfigInvalid(field_name, "missing")
    value = doc[key]
    if not isinstance(value, kind):
        raise ConfigInvalid(field_name, f"expected {kind.__name__}, "
                                        f"got {type(value).__name__}")
    return value


def load_platform_config(path: str | Path, port_override: int | None = None,
                         data_dir: str | Path | None = None) -> PlatformConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigInvalid("(file)", f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigInvalid("(file)", f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigInvalid("(file)", "top level must be an object")

    base = path.parent

    def resolve(value: str, data: bool) -> Path:
        p = Path(value)
        if p.is_absolute():
            return p
        if data and data_dir is not None:
            return Path(data_dir) / p
        return base / p

    features_raw = doc.get("features", list(FEATURES))
    if not isinstance(features_raw, list):
        raise ConfigInvalid("features", "must be a list")
    unknown = [f for f in features_raw if f not in FEATURES]
    if unknown:
        raise ConfigInvalid("features", f"unknown feature flags {unknown}")
    features = set(features_raw)

    bridge_doc = doc.get("bridge", {})
    if not isinstance(bridge_doc, dict):
        raise ConfigInvalid("bridge", "must be an object")
    port = port_override if port_override is not None else int(
        bridge_doc.get("port", 9090))

    modules: list[ModuleSpec] = []
    units: list[LaunchUnit] = []
    for i, mod_doc in enumerate(doc.get("modules", [])):
        where = f"modules[{i}]"
        try:
            unit_docs = _require(mod_doc, "launch_units", list, f"{where}.launch_units")
            mod_units = [LaunchUnit.from_dict(u) for u in unit_docs]
            expected = mod_doc.get("expected_nodes")
            if expected is None:
                expected = [n for u in mod_units for n in u.nodes_started]
            modules.append(ModuleSpec(
                name=_require(mod_doc, "name", str, f"{where}.name"),
                launch_units=[u.id for u in mod_units],
                expected_nodes=list(expected),
                allowed_roles=list(mod_doc.get(
                    "allowed_roles", ["administrator", "operator"])),
            ))
            units.extend(mod_units)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigInvalid):
                raise
            raise ConfigInvalid(where, str(exc)) from exc
    unit_ids = [u.id for u in units]
    if len(unit_ids) != len(set(unit_ids)):
        raise ConfigInvalid("modules", "launch unit ids must be unique")

    graphs = []
    for i, g in enumerate(doc.get("sensor_graphs", [])):
        try:
            spec = SensorGraphSpec.from_dict(g)
            validate_topic_name(spec.topic)
            graphs.append(spec)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigInvalid(f"sensor_graphs[{i}]", str(exc)) from exc

    videos = []
    for i, v in enumerate(doc.get("video_streams", [])):
        where = f"video_streams[{i}]"
        try:
            validate_topic_name(v["topic"])
            if float(v["fps"]) <= 0:
                raise ConfigInvalid(where, "fps must be > 0")
            videos.append({"name": v["name"], "topic": v["topic"],
                           "fps": float(v["fps"])})
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigInvalid):
                raise
            raise ConfigInvalid(where, str(exc)) from exc

    robot_fixture_path = doc.get("robot_fixture")
    if robot_fixture_path is not None:
        fixture_file = resolve(robot_fixture_path, data=False)
        try:
            robot_fixture = json.loads(fixture_file.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigInvalid("robot_fixture", f"cannot read: {exc}") from exc
        except ValueError as exc:
            raise ConfigInvalid("robot_fixture", f"invalid JSON: {exc}") from exc
    else:
        robot_fixture = doc.get("robot", {"groups": []})

    process_path = doc.get("process_definition")
    process_definition_path = (resolve(process_path, data=False)
                               if process_path else None)
    if process_definition_path and not process_definition_path.exists():
        raise ConfigInvalid("process_definition",
                            f"file not found: {process_definition_path}")

    panel_fields = doc.get("panel_fields", [])
    for i, f in enumerate(panel_fields):
        if not isinstance(f, dict) or "id" not in f:
            raise ConfigInvalid(f"panel_fields[{i}]", "needs an 'id'")

    db_doc = doc.get("database", {})
    config = PlatformConfig(
        port=port,
        features=features,
        modules=modules,
        launch_units=units,
        sensor_graphs=graphs,
        video_streams=videos,
        robot_fixture=robot_fixture,
        process_definition_path=process_definition_path,
        panel_fields=list(panel_fields),
        config_params=list(doc.get("config_params", [])),
        config_csv=resolve(doc.get("config_csv", "data/config.csv"), data=True),
        users_file=resolve(doc.get("users_file", "data/users.json"), data=True),
        database_dir=resolve(db_doc.get("dir", "data/database"), data=True),
        database_whitelist=list(db_doc.get("whitelist", [])),
        usb_mount_root=resolve(db_doc.get("mount_root", "data/usb"), data=True),
        routines_dir=resolve(doc.get("routines_dir", "data/routines"), data=True),
        motion_enabled_at_boot=bool(doc.get("motion_enabled_at_boot", True)),
        admin_services=list(bridge_doc.get("admin_services",
                                           DEFAULT_ADMIN_SERVICES)),
        auth_iterations=doc.get("auth_iterations"),
    )
    if "security" in features and not config.users_file.exists():
        raise ConfigInvalid("users_file", f"file not found: {config.users_file}")
    if "auto" in features and config.process_definition_path is None:
        raise ConfigInvalid("process_definition",
                            "required when the 'auto' feature is enabled")
    return config


def ui_view(config: PlatformConfig) -> dict:
    """The UI-relevant slice served by /ui/get_platform_config."""
    return {
        "features": sorted(config.features),
        "sensor_graphs": [g.to_dict() for g in config.sensor_graphs],
        "video_streams": config.video_streams,
        "panel_fields": config.panel_fields,
        "modules": [{"name": m.name, "launch_units": m.launch_units,
                     "allowed_roles": m.allowed_roles} for m in config.modules],
        "groups": [g.get("name") for g in config.robot_fixture.get("groups", [])],
        "database_whitelist": config.database_whitelist,
    }
