import { AppContext, PageView, el } from "../app.js";
import { Unsubscribe } from "../store.js";

interface OperationEntry {
  index: number;
  label: string;
}

export function autoPage(ctx: AppContext): PageView {
  const subs: Unsubscribe[] = [];
  let opSelect: HTMLSelectElement;
  let panelHost: HTMLElement;
  let logHost: HTMLElement;
  let videoImg: HTMLImageElement;
  let videoUnsub: Unsubscribe | null = null;

  function command(cmd: string, payload: Record<string, unknown> = {}): void {
    ctx.client.publish(`/process/cmd/${cmd}`, payload as never);
  }

  function watchVideo(topic: string): void {
    videoUnsub?.();
    videoUnsub = null;
    if (!topic) return;
    videoUnsub = ctx.client.subscribe(topic, (msg) => {
      const doc = msg as { format?: string; data?: string } | null;
      if (doc?.data) {
        videoImg.src = `data:image/${doc.format ?? "png"};base64,${doc.data}`;
      }
    });
    subs.push(() => {
      videoUnsub?.();
      videoUnsub = null;
    });
  }

  return {
    mount(host: HTMLElement): void {
      opSelect = el("select", { id: "operation-select", size: "6" });
      panelHost = el("dl", { class: "status-panel", id: "status-panel" });
      logHost = el("div", { class: "log-panel", id: "log-panel" });
      videoImg = el("img", { class: "video-frame", id: "video-frame", alt: "video" });

      const buttons = ["start", "stop"].map((cmd) => {
        const b = el("button", { id: `cmd-${cmd}`, class: `cmd-${cmd}` },
                     cmd[0].toUpperCase() + cmd.slice(1));
        b.addEventListener("click", () => command(cmd));
        return b;
      });
      let paused = false;
      const pauseResume = el("button", { id: "cmd-pause" }, "Pause");
      pauseResume.addEventListener("click", () => {
        command(paused ? "resume" : "pause");
        paused = !paused;
        pauseResume.textContent = paused ? "Resume" : "Pause";
      });
      const step = el("button", { id: "cmd-step" }, "Run step");
      step.addEventListener("click", () => {
        const index = Number(opSelect.value);
        if (!Number.isNaN(index)) command("step", { index });
      });

      const motionToggle = el("button", { id: "motion-toggle" }, "Motion: ?");
      let motionEnabled: boolean | null = null;
      const renderMotion = () => {
        motionToggle.textContent = `Motion: ${motionEnabled === null ? "?"
          : motionEnabled ? "enabled" : "disabled"}`;
      };
      motionToggle.addEventListener("click", () => {
        const service = motionEnabled ? "/process/disable_motion"
                                      : "/process/enable_motion";
        ctx.call(service).then((values) => {
          motionEnabled = Boolean(
            (values as { motion_enabled?: boolean } | null)?.motion_enabled);
          renderMotion();
        }).catch((err: Error) => ctx.toast(err.message));
      });

      const videoSelect = el("select", { id: "video-select" });
      const streams = ctx.platform.get()?.video_streams ?? [];
      videoSelect.replaceChildren(
        el("option", { value: "" }, "(no stream)"),
        ...streams.map((s) => el("option", { value: s.topic }, s.name)));
      videoSelect.addEventListener("change", () => watchVideo(videoSelect.value));

      host.append(el("section", { class: "auto-grid" },
        el("div", { class: "card control-card" },
          el("h3", {}, "Process control"),
          el("div", { class: "cmd-row" }, buttons[0], buttons[1], pauseResume, step),
          motionToggle,
          el("div", { class: "op-title" }, "Operations"),
          opSelect),
        el("div", { class: "card" },
          el("h3", {}, "Status"), panelHost,
          el("h3", {}, "Log"), logHost),
        el("div", { class: "card video-card" },
          el("h3", {}, "Video"), videoSelect, videoImg)));

      ctx.call("/process/get_operations").then((values) => {
        const ops = (values as { operations?: OperationEntry[] } | null)
          ?.operations ?? [];
        opSelect.replaceChildren(...ops.map((op) =>
          el("option", { value: String(op.index) }, `${op.index}: ${op.label}`)));
      }).catch((err: Error) => ctx.toast(err.message));

      subs.push(ctx.client.subscribe("/process/current_op", (msg) => {
        const index = (msg as { index?: number } | null)?.index;
        if (index !== undefined) opSelect.value = String(index);
      }));
      subs.push(ctx.client.subscribe("/ui/status_panel", (msg) => {
        const fields = (msg as { fields?: Record<string, unknown> } | null)?.fields;
        if (!fields) return;
        if (typeof fields.motion_enabled === "boolean") {
          motionEnabled = fields.motion_enabled;
          renderMotion();
        }
        panelHost.replaceChildren(...Object.entries(fields).flatMap(([k, v]) => [
          el("dt", {}, k), el("dd", { "data-field": k }, String(v)),
        ]));
      }));
      subs.push(ctx.client.subscribe("/ui/logs", (msg) => {
        const doc = msg as { text?: string; severity?: string } | null;
        if (!doc?.text) return;
        logHost.append(el("div", { class: `log-line log-${doc.severity ?? "info"}` },
                          doc.text));
        while (logHost.childElementCount > 200) logHost.firstElementChild?.remove();
        logHost.scrollTop = logHost.scrollHeight;
      }));
      subs.push(ctx.client.subscribe("/robot/status", () => {
        // keeps the robot state fresh for the video overlay page section
      }));
    },
    unmount(): void {
      for (const unsub of subs) unsub();
      subs.length = 0;
    },
  };
}
