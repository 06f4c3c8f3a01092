import assert from "node:assert/strict";
import { test } from "node:test";

import { gaussianSource, splitmix32 } from "./rng.js";

test("same seed gives the same sequence", () => {
  const a = splitmix32(7);
  const b = splitmix32(7);
  for (let i = 0; i < 100; i++) {
    assert.equal(a(), b());
  }
});

test("different seeds diverge", () => {
  const a = splitmix32(7);
  const b = splitmix32(8);
  const draws = Array.from({ length: 10 }, () => [a(), b()]);
  assert.ok(draws.some(([x, y]) => x !== y));
});

test("uniform draws stay in [0, 1)", () => {
  const uniform = splitmix32(123);
  for (let i = 0; i < 10_000; i++) {
    const value = uniform();
    assert.ok(value >= 0 && value < 1);
  }
});

test("gaussian draws have roughly standard moments", () => {
  const gaussian = gaussianSource(splitmix32(42));
  const n = 20_000;
  let sum = 0;
  let sumSq = 0;
  for (let i = 0; i < n; i++) {
    const value = gaussian();
    sum += value;
    sumSq += value * value;
  }
  const mean = sum / n;
  const variance = sumSq / n - mean * mean;
  assert.ok(Math.abs(mean) < 0.03, `mean ${mean}`);
  assert.ok(Math.abs(variance - 1) < 0.05, `variance ${variance}`);
});
