import { AppContext, PageView, el } from "../app.js";
import { Unsubscribe } from "../store.js";

interface AlarmEntry {
  id: string;
  text: string;
  status: "active" | "inactive";
  raised_at: number;
}

export function alarmsPage(ctx: AppContext): PageView {
  const subs: Unsubscribe[] = [];
  let listHost: HTMLElement;
  let safetyHost: HTMLElement;

  function render(alarms: AlarmEntry[], safetyOk: boolean): void {
    safetyHost.replaceChildren(el("span", {
      class: safetyOk ? "safety ok" : "safety bad",
      id: "safety-state",
    }, safetyOk ? "system safe" : "active alarms"));
    listHost.replaceChildren(...alarms.map((alarm) =>
      el("div", { class: `alarm-row alarm-${alarm.status}`, "data-alarm": alarm.id },
        el("span", { class: "alarm-id" }, alarm.id),
        el("span", { class: "alarm-text" }, alarm.text),
        el("span", { class: "alarm-status" }, alarm.status))));
    if (alarms.length === 0) {
      listHost.append(el("div", { class: "hint", id: "no-alarms" }, "no alarms"));
    }
  }

  return {
    mount(host: HTMLElement): void {
      listHost = el("div", { class: "alarm-list", id: "alarm-list" });
      safetyHost = el("div", { class: "safety-banner" });
      const reset = el("button", { id: "alarm-reset", class: "primary" },
                       "Reset alarms");
      reset.addEventListener("click", () => {
        ctx.client.publish("/safety/reset", {});
      });
      host.append(el("section", {}, safetyHost, listHost, reset));
      subs.push(ctx.client.subscribe("/safety/alarms", (msg) => {
        const doc = msg as { alarms?: AlarmEntry[]; safety_ok?: boolean } | null;
        render(doc?.alarms ?? [], doc?.safety_ok ?? true);
      }));
      // ask the safety node to publish the current list
      ctx.client.publish("/safety/request_update", {});
    },
    unmount(): void {
      for (const unsub of subs) unsub();
      subs.length = 0;
    },
  };
}
