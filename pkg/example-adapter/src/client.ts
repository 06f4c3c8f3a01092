/**
 * The client side of the audit protocol as a pure state machine over
 * an async line stream, so it can be exercised without a process.
 *
 * Flow: wait for `init`, then keep exactly one `eval` in flight. Every
 * `objectives` reply confirms the pending point into a rolling buffer
 * of the last `pop` evaluations; when the harness reports no budget
 * left, the buffer goes out as `final_population`. A `done` at any
 * moment means exit cleanly without writing another byte.
 */

import {
  parseHarnessMessage,
  serialize,
  type InitMessage,
} from "./protocol.js";
import type { Strategy } from "./strategies.js";

export type StrategyFactory = (init: InitMessage) => Strategy;

export async function runClient(
  makeStrategy: StrategyFactory,
  lines: AsyncIterable<string>,
  write: (line: string) => void,
  diagnose: (message: string) => void = () => {}
): Promise<number> {
  let strategy: Strategy | null = null;
  let init: InitMessage | null = null;
  let pending: number[] | null = null;
  let finalSent = false;
  const buffer: number[][] = [];

  const sendEval = () => {
    pending = strategy!.ask();
    write(serialize({ type: "eval", x: pending }));
  };
  const sendFinal = () => {
    write(serialize({ type: "final_population", X: buffer }));
    finalSent = true;
  };

  for await (const line of lines) {
    if (!line.trim()) {
      continue;
    }
    const message = parseHarnessMessage(line);
    if (message === null) {
      diagnose(`unrecognised harness message: ${line.slice(0, 200)}`);
      return 1;
    }
    if (message.type === "done") {
      return 0;
    }
    if (message.type === "init") {
      if (init !== null) {
        diagnose("harness sent init twice");
        return 1;
      }
      init = message;
      strategy = makeStrategy(message);
      sendEval();
      continue;
    }
    if (init === null || strategy === null) {
      diagnose(`harness sent ${message.type} before init`);
      return 1;
    }
    if (message.type === "objectives") {
      if (pending === null) {
        diagnose("objectives arrived with no evaluation in flight");
        return 1;
      }
      buffer.push(pending);
      if (buffer.length > init.pop) {
        buffer.shift();
      }
      pending = null;
      strategy.tell(message.f);
      if (message.remaining > 0) {
        sendEval();
      } else {
        sendFinal();
      }
      continue;
    }
    // budget_exhausted: the remaining-count mirror should prevent this,
    // but the harness is authoritative, so wrap up instead of re-asking
    pending = null;
    if (!finalSent && buffer.length > 0) {
      sendFinal();
    }
  }
  diagnose("harness closed the stream before sending done");
  return 1;
}
