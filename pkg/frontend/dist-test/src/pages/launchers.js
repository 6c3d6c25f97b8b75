import { el } from "../app.js";
export function launchersPage(ctx) {
    const subs = [];
    const states = new Map();
    let busy = false;
    let listHost;
    function render() {
        const platform = ctx.platform.get();
        const role = ctx.session.get()?.role;
        if (!platform)
            return;
        // modules the current role may manage; others stay visible but locked
        const rows = platform.modules.map((mod) => {
            const state = states.get(mod.name) ?? "inactive";
            const permitted = role !== undefined && mod.allowed_roles.includes(role);
            const launch = el("button", { class: "launch" }, "Launch");
            const stop = el("button", { class: "stop" }, "Stop");
            launch.toggleAttribute("disabled", busy || !permitted);
            stop.toggleAttribute("disabled", busy || !permitted);
            launch.addEventListener("click", () => send("/ui/launch_nodes", mod.launch_units));
            stop.addEventListener("click", () => send("/ui/stop_nodes", mod.launch_units));
            return el("div", { class: "module-row", "data-module": mod.name }, el("span", { class: `state-dot state-${state}`, title: state }), el("span", { class: "module-name" }, mod.name), el("span", { class: "module-state" }, state), launch, stop);
        });
        const allUnits = platform.modules
            .filter((m) => role !== undefined && m.allowed_roles.includes(role))
            .flatMap((m) => m.launch_units);
        const launchAll = el("button", { id: "launch-all" }, "Launch all");
        const stopAll = el("button", { id: "stop-all" }, "Stop all");
        launchAll.toggleAttribute("disabled", busy || allUnits.length === 0);
        stopAll.toggleAttribute("disabled", busy || allUnits.length === 0);
        launchAll.addEventListener("click", () => send("/ui/launch_nodes", allUnits));
        stopAll.addEventListener("click", () => send("/ui/stop_nodes", allUnits));
        listHost.replaceChildren(...rows, el("div", { class: "module-row all-row" }, el("span", { class: "module-name" }, "All"), launchAll, stopAll));
    }
    function send(service, units) {
        ctx.call(service, { units }).catch((err) => ctx.toast(err.message));
    }
    return {
        mount(host) {
            listHost = el("div", { class: "module-list", id: "module-list" });
            host.append(el("section", {}, el("p", { class: "hint" }, "Launch and stop system modules; the dot shows the observed state."), listHost));
            subs.push(ctx.client.subscribe("/ui/module_states", (msg) => {
                const doc = msg;
                for (const entry of doc.modules)
                    states.set(entry.name, entry.state);
                render();
            }));
            subs.push(ctx.client.subscribe("/ui/launch_busy", (msg) => {
                busy = Boolean(msg?.busy);
                render();
            }));
            render();
        },
        unmount() {
            for (const unsub of subs)
                unsub();
            subs.length = 0;
        },
    };
}
