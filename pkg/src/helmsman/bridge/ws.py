"""WebSocket binding for the bridge: one JSON document per text frame."""

from __future__ import annotations

import logging
import threading

from websockets.exceptions import ConnectionClosed
from websockets.sync.server import serve

logger = logging.getLogger(__name__)

DEFAULT_PORT = 9090


class _WsTransport:
    def __init__(self, connection):
        self._connection = connection
        self._lock = threading.Lock()

    def send(self, text: str) -> None:
        with self._lock:
            self._connection.send(text)


class WebSocketBridge:
    def __init__(self, bridge, host: str = "0.0.0.0", port: int = DEFAULT_PORT):
        self._bridge = bridge
        self._host = host
        self._port = port
        self._server = None
        self._thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        if self._server is not None:
            return self._server.socket.getsockname()[1]
        return self._port

    def start(self) -> None:
        self._server = serve(self._handle, self._host, self._port)
        self._thread = threading.Thread(target=self._server.serve_forever,
                                        name="helmsman-ws", daemon=True)
        self._thread.start()

    def stop(self) -> None:
        if self._server is not None:
            self._server.shutdown()
            self._server = None
        self._bridge.close_all()
        if self._thread is not None:
            self._thread.join(timeout=5.0)
            self._thread = None

    def _handle(self, connection) -> None:
        session = self._bridge.accept_connection(_WsTransport(connection))
        try:
            for raw in connection:
                if isinstance(raw, bytes):
                    # binary frames unsupported; video travels as base64 text
                    self._bridge.handle_frame(session, raw.decode("utf-8", "replace"))
                    continue
                self._bridge.handle_frame(session, raw)
        except ConnectionClosed:
            pass
        except Exception:
            logger.exception("websocket session %s crashed", session.session_id)
        finally:
            self._bridge.close_session(session)
