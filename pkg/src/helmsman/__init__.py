"""helmsman — reconfigurable operations platform for ROS-style robotic systems."""

__version__ = "0.1.0"
