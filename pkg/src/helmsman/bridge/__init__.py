"""rosbridge-v2-compatible WebSocket bridge between the bus and web clients."""

from helmsman.bridge.protocol import BridgeOp, ProtocolError, parse_frame, status_frame
from helmsman.bridge.server import BridgeServer, ClientSession, role_allows
from helmsman.bridge.throttle import DROP, EMIT, ENQUEUE, ThrottleGate
