import assert from "node:assert/strict";
import { test } from "node:test";

import { parseHarnessMessage, serialize } from "./protocol.js";

test("serialize emits one JSON line", () => {
  const line = serialize({ type: "eval", x: [0.25, 0.5] });
  assert.equal(line, '{"type":"eval","x":[0.25,0.5]}\n');
  assert.equal(
    serialize({ type: "final_population", X: [[0, 1]] }),
    '{"type":"final_population","X":[[0,1]]}\n'
  );
});

test("harness messages parse", () => {
  const init = parseHarnessMessage(
    '{"type":"init","problem":"f2a","d":2,"budget":30,"pop":5}'
  );
  assert.deepEqual(init, {
    type: "init",
    problem: "f2a",
    d: 2,
    budget: 30,
    pop: 5,
  });
  const objectives = parseHarnessMessage(
    '{"type":"objectives","f":[0.5,-0.5],"remaining":29}'
  );
  assert.deepEqual(objectives, {
    type: "objectives",
    f: [0.5, -0.5],
    remaining: 29,
  });
  assert.deepEqual(parseHarnessMessage('{"type":"done"}'), { type: "done" });
  assert.deepEqual(parseHarnessMessage('{"type":"budget_exhausted","remaining":0}'), {
    type: "budget_exhausted",
    remaining: 0,
  });
});

test("malformed lines parse to null", () => {
  for (const line of [
    "not json",
    "[1,2,3]",
    '{"no":"type"}',
    '{"type":"launch_missiles"}',
    '{"type":"init","problem":"f2a","d":0,"budget":30,"pop":5}',
    '{"type":"init","problem":"f2a","d":2,"budget":30}',
    '{"type":"objectives","f":[0.5],"remaining":29}',
    '{"type":"objectives","f":["a","b"],"remaining":29}',
  ]) {
    assert.equal(parseHarnessMessage(line), null, line);
  }
});
