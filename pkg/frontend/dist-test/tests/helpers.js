// Shared test scaffolding: a jsdom environment, a fake bridge socket
// speaking just enough of the protocol, and polling waits.
import { JSDOM } from "jsdom";
export function setupDom() {
    const dom = new JSDOM('<!doctype html><html><body><div id="app"></div></body></html>', { url: "http://localhost/" });
    const g = globalThis;
    g.window = dom.window;
    g.document = dom.window.document;
    return dom;
}
export async function until(predicate, timeoutMs = 10000, what = "condition") {
    const deadline = Date.now() + timeoutMs;
    while (Date.now() < deadline) {
        if (predicate())
            return;
        await new Promise((resolve) => setTimeout(resolve, 25));
    }
    if (!predicate())
        throw new Error(`timed out waiting for ${what}`);
}
export const TEST_PLATFORM_INFO = {
    features: ["security", "launchers", "sensors", "manual", "auto",
        "video", "config", "record", "alarms", "database"],
    sensor_graphs: [
        { name: "force_left", id: "force_left", title: "Left force",
            kind: "time_evolution", topic: "/sensors/force_left", rate_hz: 10,
            labels: ["Fx", "Fy", "Fz"], axes: { y_min: -10, y_max: 10 }, points: 16 },
        { name: "tactile", id: "tactile", title: "Tactile", kind: "scatter",
            topic: "/sensors/tactile", rate_hz: 5, labels: [],
            axes: { y_min: -1, y_max: 1 }, points: 16 },
    ],
    video_streams: [{ name: "workbench", topic: "/camera/workbench", fps: 5 }],
    panel_fields: [{ id: "robot_speed", display_name: "Robot speed", default: 0 }],
    modules: [
        { name: "Process control", launch_units: ["process_core"],
            allowed_roles: ["administrator", "operator"] },
        { name: "Vision system", launch_units: ["vision_camera"],
            allowed_roles: ["administrator"] },
    ],
    groups: ["arm_left", "arm_right"],
    database_whitelist: ["wires.csv"],
};
// One fake socket per connection attempt; service handlers are shared.
export class FakeBridge {
    constructor() {
        this.sockets = [];
        this.services = new Map();
        this.subscriptions = new Set();
        this.published = [];
        this.services.set("/ui/get_platform_config", () => TEST_PLATFORM_INFO);
        this.services.set("/ui/get_operation_mode", () => ({ mode: "idle" }));
        this.services.set("/ui/login", (args) => ({
            token: "tok-1",
            username: String(args.username ?? "admin"),
            role: args.username === "operator" ? "operator" : "administrator",
        }));
        this.services.set("/ui/logout", () => ({ ok: true }));
        this.services.set("/process/get_operations", () => ({
            operations: [{ index: 0, label: "op0" }, { index: 1, label: "op1" }]
        }));
        this.services.set("/robot/get_named_configs", () => ({ configs: ["home", "pick"] }));
        this.services.set("/robot/get_pose", () => ({
            pose: { position: [0, 0, 0], orientation: [0, 0, 0] }, moving: false
        }));
        this.services.set("/ui/get_config", () => ({ params: [] }));
        this.services.set("/routines/list", () => ({ routines: [] }));
        this.services.set("/db/list_drives", () => ({ drives: ["STICK"] }));
        this.services.set("/db/list_files", () => ({ files: ["wires_v2.csv"] }));
        this.factory = this.factory.bind(this);
    }
    factory() {
        const socket = new FakeSocket(this);
        this.sockets.push(socket);
        queueMicrotask(() => socket.simulateOpen());
        return socket;
    }
    emit(topic, msg) {
        const socket = this.sockets.at(-1);
        if (socket && this.subscriptions.has(topic)) {
            socket.simulateMessage({ op: "publish", topic, msg });
        }
    }
    handleFrame(socket, raw) {
        const frame = JSON.parse(raw);
        switch (frame.op) {
            case "subscribe":
                this.subscriptions.add(String(frame.topic));
                break;
            case "unsubscribe":
                this.subscriptions.delete(String(frame.topic));
                break;
            case "publish":
                this.published.push({ topic: String(frame.topic), msg: frame.msg });
                break;
            case "call_service": {
                const handler = this.services.get(String(frame.service));
                const response = handler
                    ? { op: "service_response", service: frame.service, id: frame.id,
                        result: true, values: handler(frame.args ?? {}) }
                    : { op: "service_response", service: frame.service, id: frame.id,
                        result: false, values: { error: `unknown service ${frame.service}` } };
                queueMicrotask(() => socket.simulateMessage(response));
                break;
            }
            default:
                break;
        }
    }
}
export class FakeSocket {
    constructor(bridge = null) {
        this.bridge = bridge;
        this.sent = [];
        this.onopen = null;
        this.onmessage = null;
        this.onclose = null;
        this.onerror = null;
        this.closed = false;
    }
    send(data) {
        this.sent.push(data);
        this.bridge?.handleFrame(this, data);
    }
    close() {
        this.closed = true;
        this.onclose?.();
    }
    simulateOpen() {
        this.onopen?.();
    }
    simulateMessage(frame) {
        this.onmessage?.({ data: JSON.stringify(frame) });
    }
    simulateDrop() {
        this.onclose?.();
    }
    sentFrames() {
        return this.sent.map((s) => JSON.parse(s));
    }
}
