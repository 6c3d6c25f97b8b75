import { AppContext, PageView, el } from "../app.js";
import { firstAllowedRoute } from "../pages.js";
import { SessionInfo } from "../store.js";

export function loginPage(ctx: AppContext): PageView {
  return {
    mount(host: HTMLElement): void {
      const user = el("input", { id: "login-user", placeholder: "username",
                                 autocomplete: "username" });
      const pass = el("input", { id: "login-pass", type: "password",
                                 placeholder: "password" });
      const submit = el("button", { id: "login-submit", class: "primary" },
                        "Log in");
      const error = el("div", { class: "form-error", id: "login-error" });
      const form = el("form", { class: "login-card" },
        el("h2", {}, "Operator login"), user, pass, submit, error);
      form.addEventListener("submit", (ev) => {
        ev.preventDefault();
        error.textContent = "";
        ctx.client.callService("/ui/login", {
          username: (user as HTMLInputElement).value,
          password: (pass as HTMLInputElement).value,
        }).then((values) => {
          const session = values as unknown as SessionInfo;
          ctx.session.set(session);
          const features = ctx.platform.get()?.features ?? [];
          ctx.navigate(firstAllowedRoute(session.role, features));
        }).catch((err: Error) => {
          error.textContent = err.message;
        });
      });
      host.append(form);
    },
    unmount(): void {},
  };
}
