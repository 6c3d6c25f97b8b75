"""Cross-cutting platform services: auth, config, routines, databases, mode."""

from helmsman.platform.auth import (
    ADMINISTRATOR,
    OPERATOR,
    AuthService,
    BadCredentials,
    Forbidden,
    PlatformError,
    StoreLocked,
    StoreUnavailable,
    make_user_entry,
)
from helmsman.platform.configstore import ConfigStore, ParseError, UnknownParam
from helmsman.platform.dbupdate import (
    DatabaseUpdater,
    ExtensionMismatch,
    NotWhitelisted,
    UnknownDrive,
    UnknownFile,
)
from helmsman.platform.opmode import OperationModeTracker, derive_mode
from helmsman.platform.routines import (
    DuplicateName,
    EmptyRoutine,
    NoOpenRecording,
    RecordingOpen,
    RoutineStore,
    UnknownRoutine,
)
