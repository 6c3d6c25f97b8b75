"""In-process emulation of a ROS-style computation graph.

Named topics with publish/subscribe fan-out, named services with
request/reply, and a registry of live node names. Thread-safe: publish,
subscribe and call_service may be invoked from any thread. Subscriber
callbacks run outside the bus's internal locks; per-subscription delivery
is serialized and FIFO in publish order.
"""

from __future__ import annotations

import itertools
import logging
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable

logger = logging.getLogger(__name__)

Json = Any
Sink = Callable[["BusMessage"], None]
Handler = Callable[[Json], Json]


class BusError(Exception):
    pass


class UnknownNode(BusError):
    pass


class UnknownTopic(BusError):
    pass


class TypeConflict(BusError):
    pass


class SchemaMismatch(BusError):
    pass


class NameConflict(BusError):
    pass


class UnknownService(BusError):
    pass


class ServiceTimeout(BusError):
    pass


class HandlerFault(BusError):
    """A service handler raised; the original exception is in .cause."""

    def __init__(self, service: str, cause: BaseException):
        super().__init__(f"service {service!r} handler raised: {cause!r}")
        self.service = service
        self.cause = cause


def validate_topic_name(path: str) -> str:
    if not isinstance(path, str) or not path:
        raise ValueError("topic name must be a non-empty string")
    if not path.startswith("/"):
        raise ValueError(f"topic name must start with '/': {path!r}")
    if any(c.isspace() for c in path):
        raise ValueError(f"topic name must not contain whitespace: {path!r}")
    return path


@dataclass(frozen=True)
class BusMessage:
    """One typed, timestamped payload flowing through a named topic."""

    topic: str
    type_name: str | None
    payload: Json
    seq: int
    stamp: float  # ms since bus start


@dataclass
class NodeRecord:
    name: str
    registered_at: float
    subscriptions: set[int] = field(default_factory=set)
    services: set[str] = field(default_factory=set)


class _Subscription:
    __slots__ = ("id", "node", "topic", "sink", "pending", "delivering", "closed", "lock")

    def __init__(self, sub_id: int, node: str, topic: str, sink: Sink):
        self.id = sub_id
        self.node = node
        self.topic = topic
        self.sink = sink
        self.pending: deque[BusMessage] = deque()
        self.delivering = False
        self.closed = False
        self.lock = threading.Lock()


class _Topic:
    __slots__ = ("name", "type_name", "seq", "subscribers")

    def __init__(self, name: str, type_name: str | None = None):
        self.name = name
        self.type_name = type_name
        self.seq = 0
        self.subscribers: dict[int, _Subscription] = {}


class MessageBus:
    def __init__(self, clock=None):
        self._clock = clock
        self._epoch = clock.now_ms() if clock is not None else time.monotonic() * 1000.0
        self._lock = threading.Lock()
        self._nodes: dict[str, NodeRecord] = {}
        self._topics: dict[str, _Topic] = {}
        self._subs: dict[int, _Subscription] = {}
        self._services: dict[str, tuple[str, Handler]] = {}
        self._types: dict[str, list[str]] = {}
        self._sub_ids = itertools.count(1)

    def now_ms(self) -> float:
        if self._clock is not None:
            return self._clock.now_ms() - self._epoch
        return time.monotonic() * 1000.0 - self._epoch

    # -- node registry ------------------------------------------------

    def register_node(self, name: str) -> NodeRecord:
        if not name:
            raise ValueError("node name must be non-empty")
        with self._lock:
            if name in self._nodes:
                self._deregister_locked(name)
            record = NodeRecord(name=name, registered_at=self.now_ms())
            self._nodes[name] = record
            return record

    def deregister_node(self, name: str) -> bool:
        with self._lock:
            if name not in self._nodes:
                return False
            self._deregister_locked(name)
            return True

    def _deregister_locked(self, name: str) -> None:
        record = self._nodes.pop(name)
        for sub_id in record.subscriptions:
            sub = self._subs.pop(sub_id, None)
            if sub is None:
                continue
            with sub.lock:
                sub.closed = True
            topic = self._topics.get(sub.topic)
            if topic is not None:
                topic.subscribers.pop(sub_id, None)
        for service in record.services:
            self._services.pop(service, None)

    def list_nodes(self) -> set[str]:
        with self._lock:
            return set(self._nodes)

    # -- topics -------------------------------------------------------

    def register_type(self, type_name: str, required_fields: list[str]) -> None:
        """Declare the shallow schema (required top-level fields) of a type."""
        with self._lock:
            self._types[type_name] = list(required_fields)

    def advertise(self, node: str, topic: str, type_name: str) -> None:
        validate_topic_name(topic)
        with self._lock:
            if node not in self._nodes:
                raise UnknownNode(node)
            entry = self._topics.get(topic)
            if entry is None:
                self._topics[topic] = _Topic(topic, type_name)
            elif entry.type_name is None:
                entry.type_name = type_name
            elif entry.type_name != type_name:
                raise TypeConflict(
                    f"{topic} is {entry.type_name!r}, re-advertised as {type_name!r}"
                )

    def topic_type(self, topic: str) -> str | None:
        with self._lock:
            entry = self._topics.get(topic)
            return entry.type_name if entry else None

    def has_topic(self, topic: str) -> bool:
        with self._lock:
            entry = self._topics.get(topic)
            return entry is not None and entry.type_name is not None

    def publish(self, node: str, topic: str, payload: Json) -> int:
        with self._lock:
            entry = self._topics.get(topic)
            if entry is None or entry.type_name is None:
                raise UnknownTopic(topic)
            required = self._types.get(entry.type_name, [])
            if required:
                if not isinstance(payload, dict):
                    raise SchemaMismatch(f"{topic}: payload must be an object")
                missing = [f for f in required if f not in payload]
                if missing:
                    raise SchemaMismatch(f"{topic}: missing fields {missing}")
            entry.seq += 1
            message = BusMessage(
                topic=topic,
                type_name=entry.type_name,
                payload=payload,
                seq=entry.seq,
                stamp=self.now_ms(),
            )
            targets = [s for s in entry.subscribers.values() if not s.closed]
            for sub in targets:
                sub.pending.append(message)
        for sub in targets:
            self._drain(sub)
        return len(targets)

    # -- subscriptions ------------------------------------------------

    def subscribe(self, node: str, topic: str, sink: Sink) -> int:
        validate_topic_name(topic)
        with self._lock:
            record = self._nodes.get(node)
            if record is None:
                raise UnknownNode(node)
            entry = self._topics.get(topic)
            if entry is None:
                # late-advertise: the topic slot exists untyped until advertised
                entry = self._topics[topic] = _Topic(topic)
            sub = _Subscription(next(self._sub_ids), node, topic, sink)
            entry.subscribers[sub.id] = sub
            self._subs[sub.id] = sub
            record.subscriptions.add(sub.id)
            return sub.id

    def unsubscribe(self, sub_id: int) -> bool:
        with self._lock:
            sub = self._subs.pop(sub_id, None)
            if sub is None:
                return False
            with sub.lock:
                sub.closed = True
            topic = self._topics.get(sub.topic)
            if topic is not None:
                topic.subscribers.pop(sub_id, None)
            record = self._nodes.get(sub.node)
            if record is not None:
                record.subscriptions.discard(sub_id)
            return True

    def subscription_count(self, topic: str | None = None) -> int:
        with self._lock:
            if topic is None:
                return len(self._subs)
            entry = self._topics.get(topic)
            return len(entry.subscribers) if entry else 0

    def _drain(self, sub: _Subscription) -> None:
        while True:
            with sub.lock:
                if sub.delivering or sub.closed or not sub.pending:
                    return
                sub.delivering = True
                message = sub.pending.popleft()
            try:
                sub.sink(message)
            except Exception:
                logger.exception("subscriber %s sink failed on %s", sub.id, sub.topic)
            finally:
                with sub.lock:
                    sub.delivering = False

    # -- services -----------------------------------------------------

    def register_service(self, node: str, name: str, handler: Handler) -> None:
        validate_topic_name(name)
        with self._lock:
            record = self._nodes.get(node)
            if record is None:
                raise UnknownNode(node)
            if name in self._services:
                raise NameConflict(name)
            self._services[name] = (node, handler)
            record.services.add(name)

    def unregister_service(self, name: str) -> bool:
        with self._lock:
            entry = self._services.pop(name, None)
            if entry is None:
                return False
            record = self._nodes.get(entry[0])
            if record is not None:
                record.services.discard(name)
            return True

    def list_services(self) -> set[str]:
        with self._lock:
            return set(self._services)

    def call_service(self, name: str, request: Json, timeout_ms: float = 5000.0) -> Json:
        """Invoke a service handler exactly once; reply goes to this caller only.

        The handler runs in its own thread so a stuck handler yields
        ServiceTimeout (wall time) without wedging the caller.
        """
        with self._lock:
            entry = self._services.get(name)
        if entry is None:
            raise UnknownService(name)
        _, handler = entry
        done = threading.Event()
        box: dict[str, Any] = {}

        def run():
            try:
                box["response"] = handler(request)
            except BaseException as exc:  # noqa: BLE001 - faults are forwarded
                box["error"] = exc
            finally:
                done.set()

        thread = threading.Thread(target=run, name=f"svc{name}", daemon=True)
        thread.start()
        if not done.wait(timeout=timeout_ms / 1000.0):
            raise ServiceTimeout(f"{name} exceeded {timeout_ms} ms")
        if "error" in box:
            raise HandlerFault(name, box["error"])
        return box.get("response")
