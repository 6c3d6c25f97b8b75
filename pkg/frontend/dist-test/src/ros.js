// WebSocket client for the bridge: topic subscriptions with client-side
// fan-out, id-correlated service calls, automatic reconnect with
// exponential backoff (250 ms doubling to an 8 s cap), and
// re-subscription of active topics after a reconnect.
import { parseFrame, serializeFrame } from "./protocol.js";
import { Store } from "./store.js";
export const BACKOFF_MIN_MS = 250;
export const BACKOFF_MAX_MS = 8000;
export class RosClient {
    constructor(url, opts = {}) {
        this.url = url;
        this.state = new Store("disconnected");
        this.lastStatus = new Store("");
        this.socket = null;
        this.topics = new Map();
        this.pending = new Map();
        this.nextId = 1;
        this.backoffMs = BACKOFF_MIN_MS;
        this.closed = false;
        this.makeSocket = opts.socketFactory
            ?? ((u) => new WebSocket(u));
        this.schedule = opts.scheduler ?? ((fn, ms) => {
            const timer = setTimeout(fn, ms);
            // under Node (tests), don't let bookkeeping timers hold the process open
            timer.unref?.();
        });
    }
    connect() {
        this.closed = false;
        this.open();
    }
    close() {
        this.closed = true;
        this.socket?.close();
        this.socket = null;
        this.state.set("disconnected");
    }
    open() {
        let socket;
        try {
            socket = this.makeSocket(this.url);
        }
        catch {
            this.scheduleReconnect();
            return;
        }
        this.socket = socket;
        socket.onopen = () => {
            this.backoffMs = BACKOFF_MIN_MS;
            this.state.set("connected");
            // restore server-side subscriptions lost with the old session
            for (const [topic, entry] of this.topics) {
                this.sendSubscribe(topic, entry.options);
            }
        };
        socket.onmessage = (ev) => {
            if (typeof ev.data !== "string")
                return;
            let frame;
            try {
                frame = parseFrame(ev.data);
            }
            catch {
                return;
            }
            this.dispatch(frame);
        };
        socket.onclose = () => {
            this.socket = null;
            this.failPending("connection closed");
            if (!this.closed) {
                this.state.set("reconnecting");
                this.scheduleReconnect();
            }
            else {
                this.state.set("disconnected");
            }
        };
        socket.onerror = () => {
            // onclose follows; nothing to do here
        };
    }
    scheduleReconnect() {
        const delay = this.backoffMs;
        this.backoffMs = Math.min(this.backoffMs * 2, BACKOFF_MAX_MS);
        this.schedule(() => {
            if (!this.closed && this.socket === null)
                this.open();
        }, delay);
    }
    dispatch(frame) {
        if (frame.op === "publish" && frame.topic) {
            const entry = this.topics.get(frame.topic);
            if (entry) {
                for (const cb of [...entry.callbacks])
                    cb(frame.msg ?? null);
            }
            return;
        }
        if (frame.op === "service_response" && frame.id !== undefined) {
            const call = this.pending.get(String(frame.id));
            if (!call)
                return;
            this.pending.delete(String(frame.id));
            if (frame.result) {
                call.resolve(frame.values ?? null);
            }
            else {
                const values = frame.values;
                call.reject(new Error(values?.error ?? "service call failed"));
            }
            return;
        }
        if (frame.op === "status") {
            this.lastStatus.set(`${frame.level}: ${frame.msg}`);
        }
    }
    send(frame) {
        if (this.socket === null)
            throw new Error("not connected");
        this.socket.send(serializeFrame(frame));
    }
    sendSubscribe(topic, options) {
        if (this.socket === null || this.state.get() !== "connected")
            return;
        const frame = { op: "subscribe", topic };
        if (options.throttleRate !== undefined)
            frame.throttle_rate = options.throttleRate;
        if (options.queueLength !== undefined)
            frame.queue_length = options.queueLength;
        this.send(frame);
    }
    // One bridge subscription per topic; local callbacks fan out. The
    // returned function releases this callback and unsubscribes from the
    // bridge when it was the last one.
    subscribe(topic, cb, options = {}) {
        let entry = this.topics.get(topic);
        if (!entry) {
            entry = { callbacks: new Set(), options };
            this.topics.set(topic, entry);
            this.sendSubscribe(topic, options);
        }
        entry.callbacks.add(cb);
        return () => {
            const current = this.topics.get(topic);
            if (!current || !current.callbacks.delete(cb))
                return;
            if (current.callbacks.size === 0) {
                this.topics.delete(topic);
                if (this.socket !== null && this.state.get() === "connected") {
                    this.send({ op: "unsubscribe", topic });
                }
            }
        };
    }
    publish(topic, msg, type) {
        const frame = { op: "publish", topic, msg };
        if (type !== undefined)
            frame.type = type;
        this.send(frame);
    }
    callService(service, args = {}, timeoutMs = 10000) {
        const id = String(this.nextId++);
        return new Promise((resolve, reject) => {
            this.pending.set(id, { resolve, reject });
            try {
                this.send({ op: "call_service", service, args, id });
            }
            catch (err) {
                this.pending.delete(id);
                reject(err instanceof Error ? err : new Error(String(err)));
                return;
            }
            this.schedule(() => {
                if (this.pending.delete(id)) {
                    reject(new Error(`service ${service} timed out`));
                }
            }, timeoutMs);
        });
    }
    activeSubscriptions() {
        return [...this.topics.keys()].sort();
    }
    failPending(reason) {
        const calls = [...this.pending.values()];
        this.pending.clear();
        for (const call of calls)
            call.reject(new Error(reason));
    }
}
