// WebSocket client for the bridge: topic subscriptions with client-side
// fan-out, id-correlated service calls, automatic reconnect with
// exponential backoff (250 ms doubling to an 8 s cap), and
// re-subscription of active topics after a reconnect.

import { BridgeFrame, Json, parseFrame, serializeFrame } from "./protocol.js";
import { Store, Unsubscribe } from "./store.js";

export type ConnectionState = "connected" | "reconnecting" | "disconnected";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;
export type Scheduler = (fn: () => void, ms: number) => void;

export interface SubscribeOptions {
  throttleRate?: number;
  queueLength?: number;
}

interface TopicEntry {
  callbacks: Set<(msg: Json) => void>;
  options: SubscribeOptions;
}

interface PendingCall {
  resolve: (values: Json) => void;
  reject: (err: Error) => void;
}

export const BACKOFF_MIN_MS = 250;
export const BACKOFF_MAX_MS = 8000;

export class RosClient {
  readonly state = new Store<ConnectionState>("disconnected");
  readonly lastStatus = new Store<string>("");

  private socket: SocketLike | null = null;
  private topics = new Map<string, TopicEntry>();
  private pending = new Map<string, PendingCall>();
  private nextId = 1;
  private backoffMs = BACKOFF_MIN_MS;
  private closed = false;
  private readonly makeSocket: SocketFactory;
  private readonly schedule: Scheduler;

  constructor(private url: string, opts: {
    socketFactory?: SocketFactory;
    scheduler?: Scheduler;
  } = {}) {
    this.makeSocket = opts.socketFactory
      ?? ((u: string) => new WebSocket(u) as unknown as SocketLike);
    this.schedule = opts.scheduler ?? ((fn, ms) => {
      const timer = setTimeout(fn, ms);
      // under Node (tests), don't let bookkeeping timers hold the process open
      (timer as unknown as { unref?: () => void }).unref?.();
    });
  }

  connect(): void {
    this.closed = false;
    this.open();
  }

  close(): void {
    this.closed = true;
    this.socket?.close();
    this.socket = null;
    this.state.set("disconnected");
  }

  private open(): void {
    let socket: SocketLike;
    try {
      socket = this.makeSocket(this.url);
    } catch {
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
      if (typeof ev.data !== "string") return;
      let frame: BridgeFrame;
      try {
        frame = parseFrame(ev.data);
      } catch {
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
      } else {
        this.state.set("disconnected");
      }
    };
    socket.onerror = () => {
      // onclose follows; nothing to do here
    };
  }

  private scheduleReconnect(): void {
    const delay = this.backoffMs;
    this.backoffMs = Math.min(this.backoffMs * 2, BACKOFF_MAX_MS);
    this.schedule(() => {
      if (!this.closed && this.socket === null) this.open();
    }, delay);
  }

  private dispatch(frame: BridgeFrame): void {
    if (frame.op === "publish" && frame.topic) {
      const entry = this.topics.get(frame.topic);
      if (entry) {
        for (const cb of [...entry.callbacks]) cb(frame.msg ?? null);
      }
      return;
    }
    if (frame.op === "service_response" && frame.id !== undefined) {
      const call = this.pending.get(String(frame.id));
      if (!call) return;
      this.pending.delete(String(frame.id));
      if (frame.result) {
        call.resolve(frame.values ?? null);
      } else {
        const values = frame.values as { error?: string } | null;
        call.reject(new Error(values?.error ?? "service call failed"));
      }
      return;
    }
    if (frame.op === "status") {
      this.lastStatus.set(`${frame.level}: ${frame.msg}`);
    }
  }

  private send(frame: BridgeFrame): void {
    if (this.socket === null) throw new Error("not connected");
    this.socket.send(serializeFrame(frame));
  }

  private sendSubscribe(topic: string, options: SubscribeOptions): void {
    if (this.socket === null || this.state.get() !== "connected") return;
    const frame: BridgeFrame = { op: "subscribe", topic };
    if (options.throttleRate !== undefined) frame.throttle_rate = options.throttleRate;
    if (options.queueLength !== undefined) frame.queue_length = options.queueLength;
    this.send(frame);
  }

  // One bridge subscription per topic; local callbacks fan out. The
  // returned function releases this callback and unsubscribes from the
  // bridge when it was the last one.
  subscribe(topic: string, cb: (msg: Json) => void,
            options: SubscribeOptions = {}): Unsubscribe {
    let entry = this.topics.get(topic);
    if (!entry) {
      entry = { callbacks: new Set(), options };
      this.topics.set(topic, entry);
      this.sendSubscribe(topic, options);
    }
    entry.callbacks.add(cb);
    return () => {
      const current = this.topics.get(topic);
      if (!current || !current.callbacks.delete(cb)) return;
      if (current.callbacks.size === 0) {
        this.topics.delete(topic);
        if (this.socket !== null && this.state.get() === "connected") {
          this.send({ op: "unsubscribe", topic });
        }
      }
    };
  }

  publish(topic: string, msg: Json, type?: string): void {
    const frame: BridgeFrame = { op: "publish", topic, msg };
    if (type !== undefined) frame.type = type;
    this.send(frame);
  }

  callService(service: string, args: Json = {}, timeoutMs = 10000): Promise<Json> {
    const id = String(this.nextId++);
    return new Promise<Json>((resolve, reject) => {
      this.pending.set(id, { resolve, reject });
      try {
        this.send({ op: "call_service", service, args, id });
      } catch (err) {
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

  activeSubscriptions(): string[] {
    return [...this.topics.keys()].sort();
  }

  private failPending(reason: string): void {
    const calls = [...this.pending.values()];
    this.pending.clear();
    for (const call of calls) call.reject(new Error(reason));
  }
}
