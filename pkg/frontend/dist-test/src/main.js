// Browser entry point: connect to the bridge serving this dashboard.
import { createApp } from "./app.js";
const host = document.getElementById("app");
if (host === null) {
    throw new Error("missing #app element");
}
const params = new URLSearchParams(window.location.search);
const defaultUrl = `ws://${window.location.hostname || "localhost"}:9090`;
createApp(host, params.get("bridge") ?? defaultUrl);
