/**
 * Wire types for the audit harness protocol: one JSON object per line
 * on stdio. The harness speaks first with `init`; the client then
 * alternates `eval` requests with harness replies and finishes with
 * `final_population`.
 */

export interface InitMessage {
  type: "init";
  problem: string;
  d: number;
  budget: number;
  pop: number;
}

export interface ObjectivesMessage {
  type: "objectives";
  f: [number, number];
  remaining: number;
}

export interface BudgetExhaustedMessage {
  type: "budget_exhausted";
  remaining: 0;
}

export interface DoneMessage {
  type: "done";
}

export type HarnessMessage =
  | InitMessage
  | ObjectivesMessage
  | BudgetExhaustedMessage
  | DoneMessage;

export interface EvalMessage {
  type: "eval";
  x: number[];
}

export interface FinalPopulationMessage {
  type: "final_population";
  X: number[][];
}

export type ClientMessage = EvalMessage | FinalPopulationMessage;

export function serialize(message: ClientMessage): string {
  return JSON.stringify(message) + "\n";
}

/** Parses one harness line; null when it is not a known message. */
export function parseHarnessMessage(line: string): HarnessMessage | null {
  let value: unknown;
  try {
    value = JSON.parse(line.trim());
  } catch {
    return null;
  }
  if (typeof value !== "object" || value === null) {
    return null;
  }
  const message = value as Record<string, unknown>;
  switch (message.type) {
    case "init":
      if (
        typeof message.problem === "string" &&
        isCount(message.d) &&
        isCount(message.budget) &&
        isCount(message.pop)
      ) {
        return message as unknown as InitMessage;
      }
      return null;
    case "objectives":
      if (
        Array.isArray(message.f) &&
        message.f.length === 2 &&
        message.f.every((v) => typeof v === "number" && Number.isFinite(v)) &&
        typeof message.remaining === "number" &&
        message.remaining >= 0
      ) {
        return message as unknown as ObjectivesMessage;
      }
      return null;
    case "budget_exhausted":
      return { type: "budget_exhausted", remaining: 0 };
    case "done":
      return { type: "done" };
    default:
      return null;
  }
}

function isCount(value: unknown): value is number {
  return typeof value === "number" && Number.isInteger(value) && value >= 1;
}
