import { el } from "../app.js";
export function databasePage(ctx) {
    let driveSelect;
    let fileSelect;
    let targetSelect;
    let resultHost;
    async function refreshDrives() {
        try {
            const response = await ctx.call("/db/list_drives");
            const drives = response?.drives ?? [];
            driveSelect.replaceChildren(...drives.map((d) => el("option", { value: d }, d)));
            if (drives.length > 0)
                await refreshFiles();
        }
        catch (err) {
            ctx.toast(String(err));
        }
    }
    async function refreshFiles() {
        try {
            const response = await ctx.call("/db/list_files", { drive: driveSelect.value });
            const files = response?.files ?? [];
            fileSelect.replaceChildren(...files.map((f) => el("option", { value: f }, f)));
        }
        catch (err) {
            ctx.toast(String(err));
        }
    }
    return {
        mount(host) {
            driveSelect = el("select", { id: "drive-select" });
            fileSelect = el("select", { id: "file-select" });
            targetSelect = el("select", { id: "target-select" }, ...(ctx.platform.get()?.database_whitelist ?? [])
                .map((f) => el("option", { value: f }, f)));
            resultHost = el("div", { class: "hint", id: "db-result" });
            driveSelect.addEventListener("change", () => void refreshFiles());
            const overwrite = el("button", { id: "db-overwrite", class: "primary" }, "Overwrite");
            overwrite.addEventListener("click", () => {
                ctx.call("/db/overwrite", {
                    drive: driveSelect.value,
                    source_file: fileSelect.value,
                    target_file: targetSelect.value,
                }).then((values) => {
                    const backup = values?.backup;
                    resultHost.textContent = `replaced ${targetSelect.value}`
                        + (backup ? ` (backup: ${backup})` : "");
                }).catch((err) => ctx.toast(err.message));
            });
            host.append(el("section", { class: "card db-card" }, el("h3", {}, "Database update from USB"), el("label", {}, "Drive ", driveSelect), el("label", {}, "Source file ", fileSelect), el("label", {}, "Replace ", targetSelect), overwrite, resultHost));
            void refreshDrives();
        },
        unmount() { },
    };
}
