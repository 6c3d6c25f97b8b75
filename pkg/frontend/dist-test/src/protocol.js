// rosbridge-v2 JSON envelope, as spoken by the helmsman bridge.
const OPS = new Set([
    "advertise", "unadvertise", "publish", "subscribe", "unsubscribe",
    "call_service", "service_response", "status",
]);
export function parseFrame(raw) {
    let doc;
    try {
        doc = JSON.parse(raw);
    }
    catch (err) {
        throw new Error(`unparseable frame: ${err}`);
    }
    if (typeof doc !== "object" || doc === null || Array.isArray(doc)) {
        throw new Error("frame must be a JSON object");
    }
    const op = doc.op;
    if (typeof op !== "string" || !OPS.has(op)) {
        throw new Error(`unknown op: ${String(op)}`);
    }
    return doc;
}
export function serializeFrame(frame) {
    return JSON.stringify(frame);
}
