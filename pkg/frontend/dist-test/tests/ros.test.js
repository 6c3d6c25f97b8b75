import assert from "node:assert/strict";
import { test } from "node:test";
import { BACKOFF_MAX_MS, BACKOFF_MIN_MS, RosClient } from "../src/ros.js";
import { FakeSocket } from "./helpers.js";
function makeClient() {
    const sockets = [];
    const scheduled = [];
    const scheduler = (fn, ms) => scheduled.push({ fn, ms });
    const client = new RosClient("ws://test", {
        socketFactory: () => {
            const socket = new FakeSocket();
            sockets.push(socket);
            return socket;
        },
        scheduler,
    });
    return { client, sockets, scheduled };
}
test("subscribe sends one frame per topic and fans out locally", () => {
    const { client, sockets } = makeClient();
    client.connect();
    sockets[0].simulateOpen();
    const seen = [];
    const unsub1 = client.subscribe("/alarms", (m) => seen.push(["a", m]));
    const unsub2 = client.subscribe("/alarms", (m) => seen.push(["b", m]));
    const subscribes = sockets[0].sentFrames().filter((f) => f.op === "subscribe");
    assert.equal(subscribes.length, 1);
    sockets[0].simulateMessage({ op: "publish", topic: "/alarms", msg: { n: 1 } });
    assert.deepEqual(seen, [["a", { n: 1 }], ["b", { n: 1 }]]);
    unsub1();
    assert.equal(sockets[0].sentFrames().filter((f) => f.op === "unsubscribe").length, 0);
    unsub2();
    assert.equal(sockets[0].sentFrames().filter((f) => f.op === "unsubscribe").length, 1);
    assert.deepEqual(client.activeSubscriptions(), []);
});
test("subscribe passes throttle options", () => {
    const { client, sockets } = makeClient();
    client.connect();
    sockets[0].simulateOpen();
    client.subscribe("/sensors/f", () => undefined, { throttleRate: 200, queueLength: 1 });
    const frame = sockets[0].sentFrames().find((f) => f.op === "subscribe");
    assert.equal(frame?.throttle_rate, 200);
    assert.equal(frame?.queue_length, 1);
});
test("service calls correlate by id", async () => {
    const { client, sockets } = makeClient();
    client.connect();
    sockets[0].simulateOpen();
    const p1 = client.callService("/svc", { q: 1 });
    const p2 = client.callService("/svc", { q: 2 });
    const calls = sockets[0].sentFrames().filter((f) => f.op === "call_service");
    assert.equal(calls.length, 2);
    assert.notEqual(calls[0].id, calls[1].id);
    // answer in reverse order: correlation must hold
    sockets[0].simulateMessage({ op: "service_response", service: "/svc",
        id: calls[1].id, result: true, values: { got: 2 } });
    sockets[0].simulateMessage({ op: "service_response", service: "/svc",
        id: calls[0].id, result: true, values: { got: 1 } });
    assert.deepEqual(await p1, { got: 1 });
    assert.deepEqual(await p2, { got: 2 });
});
test("failed service call rejects with the error text", async () => {
    const { client, sockets } = makeClient();
    client.connect();
    sockets[0].simulateOpen();
    const promise = client.callService("/svc");
    const call = sockets[0].sentFrames().find((f) => f.op === "call_service");
    sockets[0].simulateMessage({ op: "service_response", service: "/svc",
        id: call?.id, result: false,
        values: { error: "Forbidden: nope" } });
    await assert.rejects(promise, /Forbidden: nope/);
});
test("service timeout rejects via scheduler", async () => {
    const { client, sockets, scheduled } = makeClient();
    client.connect();
    sockets[0].simulateOpen();
    const promise = client.callService("/svc", {}, 5000);
    const timer = scheduled.find((s) => s.ms === 5000);
    assert.ok(timer);
    timer.fn();
    await assert.rejects(promise, /timed out/);
});
test("reconnect backs off exponentially and resubscribes", () => {
    const { client, sockets, scheduled } = makeClient();
    client.connect();
    sockets[0].simulateOpen();
    client.subscribe("/alarms", () => undefined);
    assert.equal(client.state.get(), "connected");
    sockets[0].simulateDrop();
    assert.equal(client.state.get(), "reconnecting");
    const delays = [];
    // walk the reconnect ladder without ever opening
    for (let i = 0; i < 8; i++) {
        const timer = scheduled.shift();
        assert.ok(timer);
        delays.push(timer.ms);
        timer.fn(); // attempt opens a socket...
        sockets.at(-1).simulateDrop(); // ...which immediately drops
    }
    assert.equal(delays[0], BACKOFF_MIN_MS);
    assert.deepEqual(delays.slice(0, 6), [250, 500, 1000, 2000, 4000, 8000]);
    assert.ok(delays.every((d) => d <= BACKOFF_MAX_MS));
    // a successful reconnect resets backoff and restores subscriptions
    const timer = scheduled.shift();
    assert.ok(timer);
    timer.fn();
    const socket = sockets.at(-1);
    socket.simulateOpen();
    assert.equal(client.state.get(), "connected");
    const resubscribed = socket.sentFrames().filter((f) => f.op === "subscribe");
    assert.equal(resubscribed.length, 1);
    assert.equal(resubscribed[0].topic, "/alarms");
    socket.simulateDrop();
    const again = scheduled.shift();
    assert.equal(again?.ms, BACKOFF_MIN_MS);
});
test("pending calls reject when the socket drops", async () => {
    const { client, sockets } = makeClient();
    client.connect();
    sockets[0].simulateOpen();
    const promise = client.callService("/svc");
    sockets[0].simulateDrop();
    await assert.rejects(promise, /closed/);
});
test("close() stops reconnecting", () => {
    const { client, sockets, scheduled } = makeClient();
    client.connect();
    sockets[0].simulateOpen();
    client.close();
    assert.equal(client.state.get(), "disconnected");
    for (const timer of scheduled.splice(0))
        timer.fn();
    assert.equal(sockets.length, 1);
});
