// rosbridge-v2 JSON envelope, as spoken by the helmsman bridge.

export type Json = null | boolean | number | string | Json[] | { [key: string]: Json };

export type BridgeOpName =
  | "advertise"
  | "unadvertise"
  | "publish"
  | "subscribe"
  | "unsubscribe"
  | "call_service"
  | "service_response"
  | "status";

export interface BridgeFrame {
  op: BridgeOpName;
  topic?: string;
  service?: string;
  type?: string;
  msg?: Json;
  args?: Json;
  values?: Json;
  result?: boolean;
  id?: string;
  throttle_rate?: number;
  queue_length?: number;
  level?: "none" | "error" | "warning" | "info";
}

const OPS: ReadonlySet<string> = new Set([
  "advertise", "unadvertise", "publish", "subscribe", "unsubscribe",
  "call_service", "service_response", "status",
]);

export function parseFrame(raw: string): BridgeFrame {
  let doc: unknown;
  try {
    doc = JSON.parse(raw);
  } catch (err) {
    throw new Error(`unparseable frame: ${err}`);
  }
  if (typeof doc !== "object" || doc === null || Array.isArray(doc)) {
    throw new Error("frame must be a JSON object");
  }
  const op = (doc as { op?: unknown }).op;
  if (typeof op !== "string" || !OPS.has(op)) {
    throw new Error(`unknown op: ${String(op)}`);
  }
  return doc as BridgeFrame;
}

export function serializeFrame(frame: BridgeFrame): string {
  return JSON.stringify(frame);
}
