/**
 * Entry point: `node dist/main.js <strategy> [--seed N]`.
 *
 * Speaks the audit protocol on stdio and exits 0 on a clean `done`,
 * 1 on a protocol problem, 2 on bad usage.
 */

import readline from "node:readline";

import { runClient } from "./client.js";
import {
  makeStrategy,
  STRATEGY_NAMES,
  type StrategyName,
} from "./strategies.js";

function parseArgs(argv: string[]): { strategy: StrategyName; seed: number } | null {
  const positional: string[] = [];
  let seed = 0;
  for (let i = 0; i < argv.length; i++) {
    if (argv[i] === "--seed") {
      const value = Number(argv[++i]);
      if (!Number.isInteger(value)) {
        return null;
      }
      seed = value;
    } else {
      positional.push(argv[i]);
    }
  }
  const [strategy] = positional;
  if (positional.length !== 1 || !STRATEGY_NAMES.includes(strategy as StrategyName)) {
    return null;
  }
  return { strategy: strategy as StrategyName, seed };
}

async function main(): Promise<number> {
  const args = parseArgs(process.argv.slice(2));
  if (args === null) {
    console.error(`usage: main.js {${STRATEGY_NAMES.join(",")}} [--seed N]`);
    return 2;
  }
  const lines = readline.createInterface({
    input: process.stdin,
    crlfDelay: Number.POSITIVE_INFINITY,
  });
  return runClient(
    (init) => makeStrategy(args.strategy, init.d, args.seed),
    lines,
    (line) => process.stdout.write(line),
    (message) => console.error(message)
  );
}

main().then(
  (code) => process.exit(code),
  (error) => {
    console.error(String(error));
    process.exit(1);
  }
);
