import assert from "node:assert/strict";
import { test } from "node:test";

import { PAGES, firstAllowedRoute, visiblePages } from "../src/pages.js";

const ALL = PAGES.map((p) => p.feature);

test("operator sees control/monitor pages only", () => {
  const routes = visiblePages("operator", ALL).map((p) => p.route);
  assert.deepEqual(routes, ["launchers", "auto", "alarms"]);
  assert.ok(!routes.includes("config"));
  assert.ok(!routes.includes("record"));
});

test("administrator sees every enabled page", () => {
  const routes = visiblePages("administrator", ALL).map((p) => p.route);
  assert.deepEqual(routes, ["launchers", "sensors", "manual", "auto",
                            "config", "record", "alarms", "database"]);
});

test("feature flags hide pages for both roles", () => {
  const features = ["auto", "alarms"];
  assert.deepEqual(visiblePages("administrator", features).map((p) => p.route),
                   ["auto", "alarms"]);
  assert.deepEqual(visiblePages("operator", features).map((p) => p.route),
                   ["auto", "alarms"]);
});

test("no session, no pages", () => {
  assert.deepEqual(visiblePages(null, ALL), []);
});

test("first allowed route falls back to login", () => {
  assert.equal(firstAllowedRoute("operator", ALL), "launchers");
  assert.equal(firstAllowedRoute("operator", ["config"]), "login");
  assert.equal(firstAllowedRoute(null, ALL), "login");
});
