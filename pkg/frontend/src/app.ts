// Application shell: side menu (navigation, socket/mode status block,
// user menu), top bar with the current page name, and the routed
// content area. Each page follows the same lifecycle: subscribe to its
// topics and query its initial state on mount, release everything on
// unmount.

import { RosClient, SocketFactory } from "./ros.js";
import { OperationMode, PlatformInfo, SessionInfo, Store, Unsubscribe } from "./store.js";
import { PAGES, Role, firstAllowedRoute, visiblePages } from "./pages.js";
import { Json } from "./protocol.js";
import { loginPage } from "./pages/login.js";
import { launchersPage } from "./pages/launchers.js";
import { sensorsPage } from "./pages/sensors.js";
import { manualPage } from "./pages/manual.js";
import { autoPage } from "./pages/auto.js";
import { configPage } from "./pages/config.js";
import { recordPage } from "./pages/record.js";
import { alarmsPage } from "./pages/alarms.js";
import { databasePage } from "./pages/database.js";

export interface PageView {
  mount(host: HTMLElement): void;
  unmount(): void;
}

export type PageFactory = (ctx: AppContext) => PageView;

export interface AppContext {
  client: RosClient;
  session: Store<SessionInfo | null>;
  platform: Store<PlatformInfo | null>;
  mode: Store<OperationMode>;
  toast(message: string, level?: "error" | "info"): void;
  navigate(route: string): void;
  authArgs(): { token?: string };
  call(service: string, args?: Json): Promise<Json>;
}

const PAGE_FACTORIES: Record<string, PageFactory> = {
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
export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
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
  readonly client: RosClient;
  readonly session = new Store<SessionInfo | null>(null);
  readonly platform = new Store<PlatformInfo | null>(null);
  readonly mode = new Store<OperationMode>("unknown");
  readonly route = new Store<string>("login");
  readonly ctx: AppContext;

  private currentView: PageView | null = null;
  private modeUnsub: Unsubscribe | null = null;
  private host!: HTMLElement;
  private contentHost!: HTMLElement;
  private menuHost!: HTMLElement;
  private titleHost!: HTMLElement;
  private toastHost!: HTMLElement;

  constructor(private url: string, opts: { socketFactory?: SocketFactory } = {}) {
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
        const merged = { ...(args as object), ...this.ctx.authArgs() } as Json;
        return this.client.callService(service, merged);
      },
    };
  }

  start(host: HTMLElement): void {
    this.host = host;
    this.render();
    this.client.state.subscribe((state) => {
      this.renderStatus();
      if (state === "connected") {
        void this.onConnected();
      } else {
        this.mode.set("unknown"); // stale mode is cleared on disconnect
      }
    });
    this.mode.subscribe(() => this.renderStatus(), false);
    this.session.subscribe(() => this.renderMenu(), false);
    this.platform.subscribe(() => this.renderMenu(), false);
    window.addEventListener("hashchange", () => {
      const route = window.location.hash.replace(/^#\/?/, "") || "login";
      if (route !== this.route.get()) this.navigate(route);
    });
    this.client.connect();
    this.navigate(window.location.hash.replace(/^#\/?/, "") || "login");
  }

  private async onConnected(): Promise<void> {
    if (this.modeUnsub === null) {
      this.modeUnsub = this.client.subscribe("/ui/operation_mode", (msg) => {
        const mode = (msg as { mode?: string } | null)?.mode;
        if (mode) this.mode.set(mode as OperationMode);
      });
    }
    try {
      const info = await this.client.callService("/ui/get_platform_config");
      this.platform.set(info as unknown as PlatformInfo);
      const current = await this.client.callService("/ui/get_operation_mode");
      const mode = (current as { mode?: string } | null)?.mode;
      if (mode) this.mode.set(mode as OperationMode);
      const features = this.platform.get()?.features ?? [];
      if (!features.includes("security") && this.session.get() === null) {
        // no login service on this system: open as a local administrator
        this.session.set({ username: "local", role: "administrator", token: "" });
        this.navigate(firstAllowedRoute("administrator", features));
      }
    } catch (err) {
      this.toast(`platform config unavailable: ${err}`);
    }
  }

  navigate(route: string): void {
    const session = this.session.get();
    const features = this.platform.get()?.features ?? [];
    if (session === null) {
      route = "login";
    } else if (route === "login" && session !== null) {
      route = firstAllowedRoute(session.role, features);
    } else {
      const descriptor = PAGES.find((p) => p.route === route);
      const allowed = descriptor !== undefined
        && features.includes(descriptor.feature)
        && descriptor.roles.includes(session.role as Role);
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

  logout(): void {
    const token = this.session.get()?.token;
    if (token) {
      void this.client.callService("/ui/logout", { token }).catch(() => undefined);
    }
    this.session.set(null);
    this.navigate("login");
  }

  toast(message: string, level: "error" | "info" = "error"): void {
    const item = el("div", { class: `toast toast-${level}` }, message);
    const close = el("button", { class: "toast-close" }, "×");
    close.addEventListener("click", () => item.remove());
    item.append(close);
    this.toastHost.append(item);
  }

  private render(): void {
    this.menuHost = el("nav", { class: "menu-nav" });
    this.titleHost = el("h1", { class: "top-title" }, "Login");
    this.contentHost = el("main", { class: "content" });
    this.toastHost = el("div", { class: "toasts", id: "toasts" });
    const statusHost = el("div", { class: "status-block", id: "status-block" });
    const userHost = el("div", { class: "user-block", id: "user-block" });
    const side = el("aside", { class: "side-menu" },
      el("div", { class: "brand" }, "helmsman"),
      this.menuHost, statusHost, userHost);
    const top = el("header", { class: "top-bar" }, this.titleHost);
    this.host.replaceChildren(
      el("div", { class: "layout" }, side,
         el("div", { class: "main-area" }, top, this.contentHost)),
      this.toastHost);
    this.renderStatus();
    this.renderMenu();
  }

  private renderStatus(): void {
    const statusHost = this.host.querySelector("#status-block");
    if (!statusHost) return;
    const socket = this.client.state.get();
    const mode = this.mode.get();
    statusHost.replaceChildren(
      el("div", { class: `socket-state socket-${socket}` }, `socket: ${socket}`),
      el("div", { class: `op-mode mode-${mode}`, id: "op-mode" }, `mode: ${mode}`));
  }

  private renderMenu(): void {
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
    if (!userHost) return;
    if (session) {
      const logout = el("button", { class: "logout", id: "logout" }, "Log out");
      logout.addEventListener("click", () => this.logout());
      userHost.replaceChildren(
        el("div", { class: "user-name" }, session.username),
        el("div", { class: "user-role" }, session.role),
        logout);
    } else {
      userHost.replaceChildren(el("div", { class: "user-name" }, "not signed in"));
    }
  }
}

export function createApp(host: HTMLElement, url: string,
                          opts: { socketFactory?: SocketFactory } = {}): App {
  const app = new App(url, opts);
  app.start(host);
  return app;
}
