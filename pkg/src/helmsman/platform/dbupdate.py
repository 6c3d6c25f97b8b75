"""Database file updates from simulated USB drives.

Drives are subdirectories of a configured mount root. Only whitelisted
files inside the database directory may be overwritten, source and
target must share an extension, and a backup of the previous version is
kept beside the target.
"""

from __future__ import annotations

import shutil
from pathlib import Path

from helmsman.platform.auth import PlatformError, _atomic_write


class UnknownDrive(PlatformError):
    pass


class UnknownFile(PlatformError):
    pass


class NotWhitelisted(PlatformError):
    pass


class ExtensionMismatch(PlatformError):
    pass


def _is_plain_name(name: str) -> bool:
    return bool(name) and "/" not in name and "\\" not in name and name not in (".", "..")


class DatabaseUpdater:
    def __init__(self, db_dir: str | Path, whitelist: list[str],
                 mount_root: str | Path):
        self._db_dir = Path(db_dir).resolve()
        self._db_dir.mkdir(parents=True, exist_ok=True)
        self._whitelist = list(whitelist)
        self._mount_root = Path(mount_root).resolve()
        self._mount_root.mkdir(parents=True, exist_ok=True)

    def list_drives(self) -> list[str]:
        return sorted(p.name for p in self._mount_root.iterdir() if p.is_dir())

    def _drive_dir(self, drive: str) -> Path:
        if not _is_plain_name(drive):
            raise UnknownDrive(drive)
        path = (self._mount_root / drive).resolve()
        if not path.is_dir() or path.parent != self._mount_root:
            raise UnknownDrive(drive)
        return path

    def list_files(self, drive: str) -> list[str]:
        return sorted(p.name for p in self._drive_dir(drive).iterdir() if p.is_file())

    def overwrite(self, drive: str, source_file: str, target_file: str) -> dict:
        drive_dir = self._drive_dir(drive)
        if not _is_plain_name(source_file):
            raise UnknownFile(source_file)
        source = (drive_dir / source_file).resolve()
        if not source.is_file() or source.parent != drive_dir:
            raise UnknownFile(source_file)
        if not _is_plain_name(target_file) or target_file not in self._whitelist:
            raise NotWhitelisted(target_file)
        target = (self._db_dir / target_file).resolve()
        if target.parent != self._db_dir:
            raise NotWhitelisted(target_file)
        if source.suffix.lower() != target.suffix.lower():
            raise ExtensionMismatch(
                f"{source.suffix or '(none)'} -> {target.suffix or '(none)'}")
        backup_name = None
        if target.exists():
            backup_name = target.name + ".bak"
            shutil.copy2(target, target.with_name(backup_name))
        _atomic_write(target, source.read_bytes())
        return {"target": target.name, "backup": backup_name}

    # -- bus wiring ---------------------------------------------------------

    def attach(self, bus, auth=None, node: str = "db_updater") -> None:
        bus.register_node(node)
        bus.register_service(node, "/db/list_drives",
                             lambda req: {"drives": self.list_drives()})
        bus.register_service(node, "/db/list_files",
                             lambda req: {"files": self.list_files(req["drive"])})

        def svc_overwrite(req):
            if auth is not None:
                auth.require_role(req.get("token"), "administrator")
            return self.overwrite(req["drive"], req["source_file"],
                                  req["target_file"])

        bus.register_service(node, "/db/overwrite", svc_overwrite)
