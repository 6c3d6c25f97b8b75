"""Simulated robot backend: motion groups, alarms, sensor and video streams."""

from helmsman.robotsim.alarms import AlarmManager, UnknownAlarm
from helmsman.robotsim.motion import Pose, interpolate_pose, plan_profile
from helmsman.robotsim.robot import (
    Absolute,
    Busy,
    LimitExceeded,
    MotionDisabled,
    MotionGate,
    MotionResult,
    NamedConfig,
    Relative,
    RobotError,
    RobotSim,
    ToolMismatch,
    UnknownConfig,
    UnknownGroup,
    UnknownTool,
)
from helmsman.robotsim.streams import SensorGraphSpec, SensorStreams, VideoStreams
