import assert from "node:assert/strict";
import { test } from "node:test";

import { MAX_POINTS, RollingSeries, polylinePoints } from "../src/charts.js";

test("rolling series caps retained points", () => {
  const series = new RollingSeries();
  for (let i = 0; i < MAX_POINTS + 250; i++) {
    series.push(["Fx", "Fy"], [i, -i]);
  }
  assert.equal(series.length("Fx"), MAX_POINTS);
  assert.equal(series.length("Fy"), MAX_POINTS);
  const fx = series.get("Fx");
  assert.equal(fx[0], 250);               // oldest dropped
  assert.equal(fx[fx.length - 1], MAX_POINTS + 249);
});

test("series tracks label order of first appearance", () => {
  const series = new RollingSeries();
  series.push(["b", "a"], [1, 2]);
  series.push(["b", "a", "c"], [3, 4, 5]);
  assert.deepEqual(series.names, ["b", "a", "c"]);
  assert.deepEqual(series.get("c"), [5]);
});

test("polyline maps values into the viewport", () => {
  const points = polylinePoints([0, 5, 10], 100, 50, 0, 10);
  assert.equal(points, "0.0,50.0 50.0,25.0 100.0,0.0");
  assert.equal(polylinePoints([], 100, 50, 0, 1), "");
});

test("degenerate axis range stays finite", () => {
  const points = polylinePoints([3, 3], 100, 50, 3, 3);
  for (const pair of points.split(" ")) {
    const [x, y] = pair.split(",").map(Number);
    assert.ok(Number.isFinite(x) && Number.isFinite(y));
  }
});
