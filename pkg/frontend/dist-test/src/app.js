// Application shell: side menu (navigation, socket/mode status block,
// user menu), top bar with the current page name, and the routed
// content area. Each page follows the same lifecycle: subscribe to its
// topics and query its initial state on mount, release everything on
// unmount.
import { RosClient } from "./ros.js";
import { Store } from "./store.js";
import { PAGES, firstAllowedRoute, visiblePages } from "./pages.js";
import { loginPage } from "./pages/login.js";
import { launchersPage } from "./pages/launchers.js";
import { sensorsPage } from "./pages/sensors.js";
import { manualPage } from "./pages/manual.js";
import { autoPage } from "./pages/auto.js";
import { configPage } from "./pages/config.js";
import { recordPage } from "./pages/record.js";
import { alarmsPage } from "./pages/alarms.js";
import { databasePage } from "./pages/database.js";
const PAGE_FACTORIES = {
    login: loginPage,
    launchers: launchersPage,
    sensors: sensorsPage,
    manual: manualPage,
    auto: autoPage,
    config: configPage,
    record: recordPage,
    alarms: alarmsPage,
    database: databasePage,
};
// small DOM builder: el("div", {class: "x"}, "text", childNode, ...)
export function el(tag, attrs = {}, ...children) {
    const node = document.createElement(tag);
    for (const [key, value] of Object.entries(attrs)) {
        node.setAttribute(key, value);
    }
    for (const child of children) {
        node.append(child);
    }
    return node;
}
export class App {
    constructor(url, opts = {}) {
        this.url = url;
        this.session = new Store(null);
        this.platform = new Store(null);
        this.mode = new Store("unknown");
        this.route = new Store("login");
        this.currentView = null;
        this.modeUnsub = null;
        this.client = new RosClient(url, { socketFactory: opts.socketFactory });
        this.ctx = {
            client: this.client,
            session: this.session,
            platform: this.platform,
            mode: this.mode,
            toast: (message, level = "error") => this.toast(message, level),
            navigate: (route) => this.navigate(route),
            authArgs: () => {
                const session = this.session.get();
                return session && session.token ? { token: session.token } : {};
            },
            call: (service, args = {}) => {
                const merged = { ...args, ...this.ctx.authArgs() };
                return this.client.callService(service, merged);
            },
        };
    }
    start(host) {
        this.host = host;
        this.render();
        this.client.state.subscribe((state) => {
            this.renderStatus();
            if (state === "connected") {
                void this.onConnected();
            }
            else {
                this.mode.set("unknown"); // stale mode is cleared on disconnect
            }
        });
        this.mode.subscribe(() => this.renderStatus(), false);
        this.session.subscribe(() => this.renderMenu(), false);
        this.platform.subscribe(() => this.renderMenu(), false);
        window.addEventListener("hashchange", () => {
            const route = window.location.hash.replace(/^#\/?/, "") || "login";
            if (route !== this.route.get())
                this.navigate(route);
        });
        this.client.connect();
        this.navigate(window.location.hash.replace(/^#\/?/, "") || "login");
    }
    async onConnected() {
        if (this.modeUnsub === null) {
            this.modeUnsub = this.client.subscribe("/ui/operation_mode", (msg) => {
                const mode = msg?.mode;
                if (mode)
                    this.mode.set(mode);
            });
        }
        try {
            const info = await this.client.callService("/ui/get_platform_config");
            this.platform.set(info);
            const current = await this.client.callService("/ui/get_operation_mode");
            const mode = current?.mode;
            if (mode)
                this.mode.set(mode);
            const features = this.platform.get()?.features ?? [];
            if (!features.includes("security") && this.session.get() === null) {
                // no login service on this system: open as a local administrator
                this.session.set({ username: "local", role: "administrator", token: "" });
                this.navigate(firstAllowedRoute("administrator", features));
            }
        }
        catch (err) {
            this.toast(`platform config unavailable: ${err}`);
        }
    }
    navigate(route) {
        const session = this.session.get();
        const features = this.platform.get()?.features ?? [];
        if (session === null) {
            route = "login";
        }
        else if (route === "login" && session !== null) {
            route = firstAllowedRoute(session.role, features);
        }
        else {
            const descriptor = PAGES.find((p) => p.route === route);
            const allowed = descriptor !== undefined
                && features.includes(descriptor.feature)
                && descriptor.roles.includes(session.role);
            if (!allowed) {
                route = firstAllowedRoute(session.role, features);
            }
        }
        this.currentView?.unmount();
        this.currentView = null;
        this.route.set(route);
        if (window.location.hash !== `#/${route}`) {
            window.location.hash = `#/${route}`;
        }
        this.contentHost.replaceChildren();
        const factory = PAGE_FACTORIES[route];
        if (factory) {
            this.currentView = factory(this.ctx);
            this.currentView.mount(this.contentHost);
        }
        const descriptor = PAGES.find((p) => p.route === route);
        this.titleHost.textContent = descriptor?.title ?? "Login";
        this.renderMenu();
    }
    logout() {
        const token = this.session.get()?.token;
        if (token) {
            void this.client.callService("/ui/logout", { token }).catch(() => undefined);
        }
        this.session.set(null);
        this.navigate("login");
    }
    toast(message, level = "error") {
        const item = el("div", { class: `toast toast-${level}` }, message);
        const close = el("button", { class: "toast-close" }, "×");
        close.addEventListener("click", () => item.remove());
        item.append(close);
        this.toastHost.append(item);
    }
    render() {
        this.menuHost = el("nav", { class: "menu-nav" });
        this.titleHost = el("h1", { class: "top-title" }, "Login");
        this.contentHost = el("main", { class: "content" });
        this.toastHost = el("div", { class: "toasts", id: "toasts" });
        const statusHost = el("div", { class: "status-block", id: "status-block" });
        const userHost = el("div", { class: "user-block", id: "user-block" });
        const side = el("aside", { class: "side-menu" }, el("div", { class: "brand" }, "helmsman"), this.menuHost, statusHost, userHost);
        const top = el("header", { class: "top-bar" }, this.titleHost);
        this.host.replaceChildren(el("div", { class: "layout" }, side, el("div", { class: "main-area" }, top, this.contentHost)), this.toastHost);
        this.renderStatus();
        this.renderMenu();
    }
    renderStatus() {
        const statusHost = this.host.querySelector("#status-block");
        if (!statusHost)
            return;
        const socket = this.client.state.get();
        const mode = this.mode.get();
        statusHost.replaceChildren(el("div", { class: `socket-state socket-${socket}` }, `socket: ${socket}`), el("div", { class: `op-mode mode-${mode}`, id: "op-mode" }, `mode: ${mode}`));
    }
    renderMenu() {
        const session = this.session.get();
        const features = this.platform.get()?.features ?? [];
        const pages = visiblePages(session?.role ?? null, features);
        this.menuHost.replaceChildren(...pages.map((p) => {
            const link = el("a", {
                href: `#/${p.route}`,
                class: p.route === this.route.get() ? "nav-link active" : "nav-link",
                "data-route": p.route,
            }, p.title);
            return link;
        }));
        const userHost = this.host.querySelector("#user-block");
        if (!userHost)
            return;
        if (session) {
            const logout = el("button", { class: "logout", id: "logout" }, "Log out");
            logout.addEventListener("click", () => this.logout());
            userHost.replaceChildren(el("div", { class: "user-name" }, session.username), el("div", { class: "user-role" }, session.role), logout);
        }
        else {
            userHost.replaceChildren(el("div", { class: "user-name" }, "not signed in"));
        }
    }
}
export function createApp(host, url, opts = {}) {
    const app = new App(url, opts);
    app.start(host);
    return app;
}
