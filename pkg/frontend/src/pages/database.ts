import { AppContext, PageView, el } from "../app.js";

export function databasePage(ctx: AppContext): PageView {
  let driveSelect: HTMLSelectElement;
  let fileSelect: HTMLSelectElement;
  let targetSelect: HTMLSelectElement;
  let resultHost: HTMLElement;

  async function refreshDrives(): Promise<void> {
    try {
      const response = await ctx.call("/db/list_drives");
      const drives = (response as { drives?: string[] } | null)?.drives ?? [];
      driveSelect.replaceChildren(...drives.map((d) => el("option", { value: d }, d)));
      if (drives.length > 0) await refreshFiles();
    } catch (err) {
      ctx.toast(String(err));
    }
  }

  async function refreshFiles(): Promise<void> {
    try {
      const response = await ctx.call("/db/list_files", { drive: driveSelect.value });
      const files = (response as { files?: string[] } | null)?.files ?? [];
      fileSelect.replaceChildren(...files.map((f) => el("option", { value: f }, f)));
    } catch (err) {
      ctx.toast(String(err));
    }
  }

  return {
    mount(host: HTMLElement): void {
      driveSelect = el("select", { id: "drive-select" });
      fileSelect = el("select", { id: "file-select" });
      targetSelect = el("select", { id: "target-select" },
        ...(ctx.platform.get()?.database_whitelist ?? [])
          .map((f) => el("option", { value: f }, f)));
      resultHost = el("div", { class: "hint", id: "db-result" });
      driveSelect.addEventListener("change", () => void refreshFiles());
      const overwrite = el("button", { id: "db-overwrite", class: "primary" },
                           "Overwrite");
      overwrite.addEventListener("click", () => {
        ctx.call("/db/overwrite", {
          drive: driveSelect.value,
          source_file: fileSelect.value,
          target_file: targetSelect.value,
        }).then((values) => {
          const backup = (values as { backup?: string } | null)?.backup;
          resultHost.textContent = `replaced ${targetSelect.value}`
            + (backup ? ` (backup: ${backup})` : "");
        }).catch((err: Error) => ctx.toast(err.message));
      });
      host.append(el("section", { class: "card db-card" },
        el("h3", {}, "Database update from USB"),
        el("label", {}, "Drive ", driveSelect),
        el("label", {}, "Source file ", fileSelect),
        el("label", {}, "Replace ", targetSelect),
        overwrite, resultHost));
      void refreshDrives();
    },
    unmount(): void {},
  };
}
