import { el } from "../app.js";
const AXES = ["x", "y", "z", "roll", "pitch", "yaw"];
export function manualPage(ctx) {
    const subs = [];
    let groupSelect;
    let configSelect;
    let poseHost;
    function group() {
        return groupSelect.value;
    }
    async function refreshConfigs() {
        try {
            const response = await ctx.call("/robot/get_named_configs", { group: group() });
            const configs = response?.configs ?? [];
            configSelect.replaceChildren(...configs.map((c) => el("option", { value: c }, c)));
        }
        catch (err) {
            ctx.toast(String(err));
        }
    }
    async function refreshPose() {
        try {
            const response = await ctx.call("/robot/get_pose", { group: group() });
            showPose(response?.pose);
        }
        catch (err) {
            ctx.toast(String(err));
        }
    }
    function showPose(pose) {
        if (!pose)
            return;
        const values = [...pose.position, ...pose.orientation];
        poseHost.replaceChildren(...values.map((v, i) => el("span", { class: "pose-val" }, `${AXES[i]}: ${v.toFixed(3)}`)));
    }
    function numberInput(id, value) {
        return el("input", { id, type: "number", step: "0.01", value });
    }
    function move(target) {
        const speed = Number(document.getElementById("speed").value);
        const accel = Number(document.getElementById("accel").value);
        ctx.call("/robot/move", { group: group(), target, speed, accel })
            .then(() => void refreshPose())
            .catch((err) => ctx.toast(err.message));
    }
    function deltaOrPose(prefix) {
        const read = (axis) => Number(document.getElementById(`${prefix}-${axis}`).value);
        return {
            position: [read("x"), read("y"), read("z")],
            orientation: [read("roll"), read("pitch"), read("yaw")],
        };
    }
    return {
        mount(host) {
            groupSelect = el("select", { id: "group-select" });
            configSelect = el("select", { id: "config-select" });
            poseHost = el("div", { class: "pose-readout", id: "pose-readout" });
            const platform = ctx.platform.get();
            const groups = platform?.groups ?? [];
            groupSelect.replaceChildren(...groups.map((g) => el("option", { value: g }, g)));
            groupSelect.addEventListener("change", () => {
                void refreshConfigs();
                void refreshPose();
            });
            const goNamed = el("button", { id: "move-named", class: "primary" }, "Move");
            goNamed.addEventListener("click", () => move({ type: "named", name: configSelect.value }));
            const absFields = AXES.map((a) => el("label", {}, a, numberInput(`abs-${a}`, "0")));
            const goAbs = el("button", { id: "move-absolute" }, "Move absolute");
            goAbs.addEventListener("click", () => move({ type: "absolute", pose: deltaOrPose("abs") }));
            const relFields = AXES.map((a) => el("label", {}, a, numberInput(`rel-${a}`, "0")));
            const goRel = el("button", { id: "move-relative" }, "Move relative");
            goRel.addEventListener("click", () => move({ type: "relative", delta: deltaOrPose("rel") }));
            const eefButtons = el("div", { class: "eef-buttons" }, ...["open", "close"].map((action) => {
                const button = el("button", { class: `eef-${action}` }, `Gripper ${action}`);
                button.addEventListener("click", () => {
                    ctx.client.publish("/robot/eef_goal", { arm: group(), tool: "gripper", action });
                });
                return button;
            }));
            const toolInput = el("input", { id: "tool-name", value: "taping_gun" });
            const toolButton = el("button", { id: "tool-change" }, "Change tool");
            toolButton.addEventListener("click", () => {
                ctx.client.publish("/robot/tool_change", { arm: group(), tool: toolInput.value });
            });
            host.append(el("section", { class: "manual-grid" }, el("div", { class: "card" }, el("h3", {}, "Target"), el("label", {}, "Group ", groupSelect), el("label", {}, "Configuration ", configSelect), el("label", {}, "Speed (m/s) ", numberInput("speed", "0.25")), el("label", {}, "Accel (m/s²) ", numberInput("accel", "0.5")), goNamed, el("div", { class: "pose-title" }, "Current pose"), poseHost), el("div", { class: "card" }, el("h3", {}, "Absolute move"), ...absFields, goAbs), el("div", { class: "card" }, el("h3", {}, "Relative move"), ...relFields, goRel), el("div", { class: "card" }, el("h3", {}, "End effector"), eefButtons, el("label", {}, "Tool ", toolInput), toolButton)));
            subs.push(ctx.client.subscribe("/robot/status", (msg) => {
                const doc = msg;
                if (doc?.group === group())
                    showPose(doc.pose);
            }));
            void refreshConfigs();
            void refreshPose();
        },
        unmount() {
            for (const unsub of subs)
                unsub();
            subs.length = 0;
        },
    };
}
