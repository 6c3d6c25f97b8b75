import { el } from "../app.js";
import { firstAllowedRoute } from "../pages.js";
export function loginPage(ctx) {
    return {
        mount(host) {
            const user = el("input", { id: "login-user", placeholder: "username",
                autocomplete: "username" });
            const pass = el("input", { id: "login-pass", type: "password",
                placeholder: "password" });
            const submit = el("button", { id: "login-submit", class: "primary" }, "Log in");
            const error = el("div", { class: "form-error", id: "login-error" });
            const form = el("form", { class: "login-card" }, el("h2", {}, "Operator login"), user, pass, submit, error);
            form.addEventListener("submit", (ev) => {
                ev.preventDefault();
                error.textContent = "";
                ctx.client.callService("/ui/login", {
                    username: user.value,
                    password: pass.value,
                }).then((values) => {
                    const session = values;
                    ctx.session.set(session);
                    const features = ctx.platform.get()?.features ?? [];
                    ctx.navigate(firstAllowedRoute(session.role, features));
                }).catch((err) => {
                    error.textContent = err.message;
                });
            });
            host.append(form);
        },
        unmount() { },
    };
}
