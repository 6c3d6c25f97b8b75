import { el } from "../app.js";
export function alarmsPage(ctx) {
    const subs = [];
    let listHost;
    let safetyHost;
    function render(alarms, safetyOk) {
        safetyHost.replaceChildren(el("span", {
            class: safetyOk ? "safety ok" : "safety bad",
            id: "safety-state",
        }, safetyOk ? "system safe" : "active alarms"));
        listHost.replaceChildren(...alarms.map((alarm) => el("div", { class: `alarm-row alarm-${alarm.status}`, "data-alarm": alarm.id }, el("span", { class: "alarm-id" }, alarm.id), el("span", { class: "alarm-text" }, alarm.text), el("span", { class: "alarm-status" }, alarm.status))));
        if (alarms.length === 0) {
            listHost.append(el("div", { class: "hint", id: "no-alarms" }, "no alarms"));
        }
    }
    return {
        mount(host) {
            listHost = el("div", { class: "alarm-list", id: "alarm-list" });
            safetyHost = el("div", { class: "safety-banner" });
            const reset = el("button", { id: "alarm-reset", class: "primary" }, "Reset alarms");
            reset.addEventListener("click", () => {
                ctx.client.publish("/safety/reset", {});
            });
            host.append(el("section", {}, safetyHost, listHost, reset));
            subs.push(ctx.client.subscribe("/safety/alarms", (msg) => {
                const doc = msg;
                render(doc?.alarms ?? [], doc?.safety_ok ?? true);
            }));
            // ask the safety node to publish the current list
            ctx.client.publish("/safety/request_update", {});
        },
        unmount() {
            for (const unsub of subs)
                unsub();
            subs.length = 0;
        },
    };
}
