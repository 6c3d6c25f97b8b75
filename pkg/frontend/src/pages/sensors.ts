import { AppContext, PageView, el } from "../app.js";
import { RollingSeries, renderScatter, renderTimeChart } from "../charts.js";
import { Unsubscribe } from "../store.js";

export function sensorsPage(ctx: AppContext): PageView {
  const subs: Unsubscribe[] = [];

  return {
    mount(host: HTMLElement): void {
      const platform = ctx.platform.get();
      const grid = el("div", { class: "chart-grid" });
      host.append(grid);
      if (!platform) return;
      for (const spec of platform.sensor_graphs) {
        const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
        svg.setAttribute("class", "chart");
        svg.setAttribute("data-graph", spec.id);
        const card = el("div", { class: "chart-card" },
                        el("h3", {}, spec.title));
        card.append(svg as unknown as Node);
        if (spec.kind === "time_evolution") {
          const legend = el("div", { class: "legend" },
                            ...spec.labels.map((l) => el("span", {}, l)));
          card.append(legend);
          const series = new RollingSeries();
          subs.push(ctx.client.subscribe(spec.topic, (msg) => {
            const doc = msg as { names?: string[]; values?: number[] } | null;
            if (!doc?.names || !doc.values) return;
            series.push(doc.names, doc.values);
            renderTimeChart(svg, series, spec.axes);
          }));
        } else {
          subs.push(ctx.client.subscribe(spec.topic, (msg) => {
            const doc = msg as { x?: number[]; y?: number[] } | null;
            if (!doc?.x || !doc.y) return;
            renderScatter(svg, doc.x, doc.y, spec.axes);
          }));
        }
        grid.append(card);
      }
    },
    unmount(): void {
      for (const unsub of subs) unsub();
      subs.length = 0;
    },
  };
}
