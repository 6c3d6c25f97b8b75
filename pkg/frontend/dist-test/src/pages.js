// Page registry and role-based visibility. A page appears in the side
// menu only when its feature flag is enabled and the session role is in
// its allowed list; operators get control/monitoring pages, while
// configuration, recording, manual motion, sensor debugging and
// database maintenance are administrator-only.
export const PAGES = [
    { route: "launchers", title: "Launchers", feature: "launchers",
        roles: ["administrator", "operator"] },
    { route: "sensors", title: "Sensors", feature: "sensors",
        roles: ["administrator"] },
    { route: "manual", title: "Manual control", feature: "manual",
        roles: ["administrator"] },
    { route: "auto", title: "Automatic control", feature: "auto",
        roles: ["administrator", "operator"] },
    { route: "config", title: "Configuration", feature: "config",
        roles: ["administrator"] },
    { route: "record", title: "Routines", feature: "record",
        roles: ["administrator"] },
    { route: "alarms", title: "Alarms", feature: "alarms",
        roles: ["administrator", "operator"] },
    { route: "database", title: "Databases", feature: "database",
        roles: ["administrator"] },
];
export function visiblePages(role, features) {
    if (role === null)
        return [];
    return PAGES.filter((p) => features.includes(p.feature) && p.roles.includes(role));
}
export function firstAllowedRoute(role, features) {
    const pages = visiblePages(role, features);
    return pages.length > 0 ? pages[0].route : "login";
}
