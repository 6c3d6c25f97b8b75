"""Transport-agnostic bridge between external clients and the bus.

Each connected client gets a session backed by its own bus node; frames
are handled in arrival order per session. Subscriptions are bridged
through a per-topic throttle gate; service calls run asynchronously and
answer with a correlated service_response. The WebSocket binding lives
in helmsman.bridge.ws.
"""

from __future__ import annotations

import itertools
import logging
import threading

from helmsman.bridge.protocol import (
    BridgeOp,
    ProtocolError,
    parse_frame,
    status_frame,
)
from helmsman.bridge.throttle import EMIT, ThrottleGate
from helmsman.bus import (
    BusError,
    HandlerFault,
    ServiceTimeout,
    UnknownService,
)

logger = logging.getLogger(__name__)

PROTOCOL_GREETING = "protocol_version=2.0"
LOGIN_SERVICE = "/ui/login"

_ROLE_RANK = {"operator": 1, "administrator": 2}


def role_allows(role: str | None, required: str) -> bool:
    return role is not None and _ROLE_RANK.get(role, 0) >= _ROLE_RANK.get(required, 99)


class _SubRecord:
    __slots__ = ("bus_sub_id", "gate", "flush_timer")

    def __init__(self, bus_sub_id: int, gate: ThrottleGate):
        self.bus_sub_id = bus_sub_id
        self.gate = gate
        self.flush_timer = None


class ClientSession:
    def __init__(self, session_id: str, node_name: str, transport):
        self.session_id = session_id
        self.node_name = node_name
        self.transport = transport
        self.authenticated_user: str | None = None
        self.role: str | None = None
        self.subscriptions: dict[str, _SubRecord] = {}
        self.advertised: set[str] = set()
        self.closed = False
        self.lock = threading.Lock()
        self.send_lock = threading.Lock()

    def subscription_topics(self) -> set[str]:
        with self.lock:
            return set(self.subscriptions)


class BridgeServer:
    def __init__(self, bus, clock, gated_services: dict[str, str] | None = None,
                 service_timeout_ms: float = 10_000.0,
                 default_queue_length: int = 0):
        self._bus = bus
        self._clock = clock
        self._gated = dict(gated_services or {})
        self._service_timeout = service_timeout_ms
        self._default_queue_length = default_queue_length
        self._ids = itertools.count(1)
        self._sessions: dict[str, ClientSession] = {}
        self._lock = threading.Lock()

    # -- session lifecycle ------------------------------------------------

    def accept_connection(self, transport) -> ClientSession:
        session_id = f"s{next(self._ids)}"
        node_name = f"ws_client_{session_id}"
        session = ClientSession(session_id, node_name, transport)
        self._bus.register_node(node_name)
        with self._lock:
            self._sessions[session_id] = session
        self._send(session, status_frame("none", PROTOCOL_GREETING))
        return session

    def close_session(self, session: ClientSession) -> None:
        with session.lock:
            if session.closed:
                return
            session.closed = True
            records = list(session.subscriptions.values())
            session.subscriptions.clear()
        for record in records:
            if record.flush_timer is not None:
                record.flush_timer.cancel()
        self._bus.deregister_node(session.node_name)
        with self._lock:
            self._sessions.pop(session.session_id, None)

    def sessions(self) -> list[ClientSession]:
        with self._lock:
            return list(self._sessions.values())

    def close_all(self) -> None:
        for session in self.sessions():
            self.close_session(session)

    # -- frame handling -----------------------------------------------------

    def handle_frame(self, session: ClientSession, raw: str) -> None:
        try:
            frame = parse_frame(raw)
        except ProtocolError as exc:
            self._send(session, status_frame("error", str(exc), exc.frame_id))
            return
        try:
            handler = getattr(self, f"_op_{frame.op}")
            handler(session, frame)
        except BusError as exc:
            self._send(session, status_frame(
                "error", f"{type(exc).__name__}: {exc}", frame.id))
        except Exception:
            logger.exception("frame handling failed: %s", raw[:200])
            self._send(session, status_frame("error", "internal error", frame.id))

    # -- ops ------------------------------------------------------------

    def _op_subscribe(self, session: ClientSession, frame: BridgeOp) -> None:
        rate = frame.throttle_rate or 0
        queue_length = (frame.queue_length if frame.queue_length is not None
                        else self._default_queue_length)
        with session.lock:
            if session.closed:
                return
            record = session.subscriptions.get(frame.topic)
            if record is not None:
                # one subscription per topic per session: update in place
                record.gate.configure(rate, queue_length)
                return
            gate = ThrottleGate(rate, queue_length)
            sub_id = self._bus.subscribe(
                session.node_name, frame.topic,
                lambda msg, t=frame.topic: self._on_bus_message(session, t, msg))
            session.subscriptions[frame.topic] = _SubRecord(sub_id, gate)

    def _op_unsubscribe(self, session: ClientSession, frame: BridgeOp) -> None:
        with session.lock:
            record = session.subscriptions.pop(frame.topic, None)
        if record is None:
            return
        if record.flush_timer is not None:
            record.flush_timer.cancel()
        self._bus.unsubscribe(record.bus_sub_id)

    def _op_advertise(self, session: ClientSession, frame: BridgeOp) -> None:
        self._bus.advertise(session.node_name, frame.topic, frame.type)
        with session.lock:
            session.advertised.add(frame.topic)

    def _op_unadvertise(self, session: ClientSession, frame: BridgeOp) -> None:
        with session.lock:
            session.advertised.discard(frame.topic)

    def _op_publish(self, session: ClientSession, frame: BridgeOp) -> None:
        if not self._bus.has_topic(frame.topic):
            self._bus.advertise(session.node_name, frame.topic,
                                frame.type or "client/Json")
            with session.lock:
                session.advertised.add(frame.topic)
        self._bus.publish(session.node_name, frame.topic, frame.msg)

    def _op_call_service(self, session: ClientSession, frame: BridgeOp) -> None:
        thread = threading.Thread(
            target=self._run_service_call, args=(session, frame),
            name=f"bridge-call-{frame.service}", daemon=True)
        thread.start()

    def _op_service_response(self, session: ClientSession, frame: BridgeOp) -> None:
        self._send(session, status_frame(
            "warning", "unexpected service_response: clients host no services",
            frame.id))

    def _op_status(self, session: ClientSession, frame: BridgeOp) -> None:
        logger.info("client status [%s]: %s", frame.level, frame.msg)

    # -- internals ----------------------------------------------------------

    def _run_service_call(self, session: ClientSession, frame: BridgeOp) -> None:
        service = frame.service
        required = self._gated.get(service)
        if required is not None and not role_allows(session.role, required):
            ok = False
            values = {"error": f"Forbidden: {service} requires role {required}"}
        else:
            try:
                values = self._bus.call_service(
                    service, frame.args if frame.args is not None else {},
                    timeout_ms=self._service_timeout)
                if values is None:
                    values = {}
                ok = True
            except HandlerFault as exc:
                cause = exc.cause
                ok = False
                values = {"error": f"{type(cause).__name__}: {cause}"}
            except UnknownService:
                ok, values = False, {"error": f"unknown service {service}"}
            except ServiceTimeout as exc:
                ok, values = False, {"error": f"timeout: {exc}"}
            except BusError as exc:
                ok, values = False, {"error": str(exc)}
        if ok and service == LOGIN_SERVICE and isinstance(values, dict):
            session.role = values.get("role")
            session.authenticated_user = values.get("username")
        response = BridgeOp(op="service_response", service=service,
                            values=values, result=ok, id=frame.id)
        self._send(session, response)

    def _on_bus_message(self, session: ClientSession, topic: str, message) -> None:
        with session.lock:
            record = session.subscriptions.get(topic)
            if record is None or session.closed:
                return
        action = record.gate.offer(message.payload, self._clock.now_ms())
        if action == EMIT:
            self._send(session, BridgeOp(op="publish", topic=topic,
                                         msg=message.payload))
        self._ensure_flush_timer(session, topic)

    def _ensure_flush_timer(self, session: ClientSession, topic: str) -> None:
        with session.lock:
            record = session.subscriptions.get(topic)
            if record is None or session.closed or record.flush_timer is not None:
                return
            due = record.gate.next_due()
            if due is None:
                return
            delay = max(0.0, due - self._clock.now_ms())
            record.flush_timer = self._clock.call_later(
                delay, lambda: self._flush(session, topic))

    def _flush(self, session: ClientSession, topic: str) -> None:
        with session.lock:
            record = session.subscriptions.get(topic)
            if record is not None:
                record.flush_timer = None
            if record is None or session.closed:
                return
        item = record.gate.flush(self._clock.now_ms())
        if item is not None:
            self._send(session, BridgeOp(op="publish", topic=topic, msg=item))
        self._ensure_flush_timer(session, topic)

    def _send(self, session: ClientSession, op: BridgeOp) -> None:
        with session.send_lock:
            if session.closed:
                return
            try:
                session.transport.send(op.serialize())
            except Exception:
                logger.warning("send to %s failed; closing session",
                               session.session_id)
                dead = True
            else:
                dead = False
        if dead:
            self.close_session(session)
