import { AppContext, PageView, el } from "../app.js";
import { Unsubscribe } from "../store.js";

export function recordPage(ctx: AppContext): PageView {
  const subs: Unsubscribe[] = [];
  let listHost: HTMLElement;
  let logHost: HTMLElement;

  function record(op: string, extra: Record<string, unknown> = {}): Promise<unknown> {
    return ctx.call("/routines/record", { op, ...extra })
      .catch((err: Error) => ctx.toast(err.message));
  }

  async function refreshList(): Promise<void> {
    try {
      const response = await ctx.call("/routines/list");
      const names = (response as { routines?: string[] } | null)?.routines ?? [];
      listHost.replaceChildren(...names.map((name) => {
        const execute = el("button", { class: "routine-exec" }, "Execute");
        execute.addEventListener("click", () => {
          ctx.client.publish("/routines/execute", { name });
        });
        const remove = el("button", { class: "routine-del" }, "Delete");
        remove.addEventListener("click", () => {
          ctx.call("/routines/delete", { name })
            .then(() => void refreshList())
            .catch((err: Error) => ctx.toast(err.message));
        });
        return el("div", { class: "routine-row", "data-routine": name },
                  el("span", { class: "routine-name" }, name), execute, remove);
      }));
      if (names.length === 0) {
        listHost.append(el("div", { class: "hint" }, "no saved routines"));
      }
    } catch (err) {
      ctx.toast(String(err));
    }
  }

  return {
    mount(host: HTMLElement): void {
      const platform = ctx.platform.get();
      const groupSelect = el("select", { id: "record-group" },
        ...(platform?.groups ?? []).map((g) => el("option", { value: g }, g)));
      const toolInput = el("input", { id: "record-tool", value: "gripper" });
      const nameInput = el("input", { id: "routine-name", placeholder: "routine name" });
      const actionInput = el("input", { id: "action-name", value: "grasp" });

      const startButton = el("button", { id: "rec-start" }, "Start recording");
      startButton.addEventListener("click", () => void record("start", {
        group: groupSelect.value, tool: (toolInput as HTMLInputElement).value,
      }));
      const poseButton = el("button", { id: "rec-pose" }, "Record pose");
      poseButton.addEventListener("click", () => void record("add_pose"));
      const actionButton = el("button", { id: "rec-action" }, "Record action");
      actionButton.addEventListener("click", () => void record("add_action", {
        action: (actionInput as HTMLInputElement).value,
      }));
      const saveButton = el("button", { id: "rec-save", class: "primary" }, "Save");
      saveButton.addEventListener("click", () => {
        void record("save", { name: (nameInput as HTMLInputElement).value })
          .then(() => void refreshList());
      });
      const discardButton = el("button", { id: "rec-discard" }, "Discard");
      discardButton.addEventListener("click", () => void record("discard"));

      listHost = el("div", { class: "routine-list", id: "routine-list" });
      logHost = el("div", { class: "log-panel", id: "record-log" });

      host.append(el("section", { class: "record-grid" },
        el("div", { class: "card" },
          el("h3", {}, "Record"),
          el("label", {}, "Group ", groupSelect),
          el("label", {}, "Tool ", toolInput),
          el("div", { class: "cmd-row" }, startButton, poseButton),
          el("label", {}, "Action ", actionInput), actionButton,
          el("label", {}, "Name ", nameInput),
          el("div", { class: "cmd-row" }, saveButton, discardButton)),
        el("div", { class: "card" }, el("h3", {}, "Saved routines"), listHost),
        el("div", { class: "card" }, el("h3", {}, "Log"), logHost)));

      subs.push(ctx.client.subscribe("/ui/logs", (msg) => {
        const doc = msg as { text?: string; severity?: string } | null;
        if (!doc?.text) return;
        logHost.append(el("div", { class: `log-line log-${doc.severity ?? "info"}` },
                          doc.text));
        while (logHost.childElementCount > 100) logHost.firstElementChild?.remove();
      }));
      void refreshList();
    },
    unmount(): void {
      for (const unsub of subs) unsub();
      subs.length = 0;
    },
  };
}
