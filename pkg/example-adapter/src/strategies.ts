/**
 * The two demonstration strategies. Both ignore objective values on
 * purpose: `random` is the unbiased reference a detector must clear,
 * and `clamped_walk` drifts with large Gaussian steps clamped to
 * [0, 1], piling its population onto the bounds.
 */

import { gaussianSource, splitmix32, type UniformSource } from "./rng.js";

export interface Strategy {
  /** Next point to evaluate, in [0, 1]^d. */
  ask(): number[];
  /** Objective feedback; these strategies deliberately discard it. */
  tell(f: [number, number]): void;
}

export const STRATEGY_NAMES = ["random", "clamped_walk"] as const;
export type StrategyName = (typeof STRATEGY_NAMES)[number];

const WALK_STEP = 0.6;

export function makeStrategy(name: StrategyName, d: number, seed: number): Strategy {
  const uniform = splitmix32(seed);
  switch (name) {
    case "random":
      return uniformStrategy(d, uniform);
    case "clamped_walk":
      return clampedWalkStrategy(d, uniform);
  }
}

function uniformStrategy(d: number, uniform: UniformSource): Strategy {
  return {
    ask: () => Array.from({ length: d }, () => uniform()),
    tell: () => {},
  };
}

function clampedWalkStrategy(d: number, uniform: UniformSource): Strategy {
  const gaussian = gaussianSource(uniform);
  let position: number[] | null = null;
  return {
    ask: () => {
      if (position === null) {
        position = Array.from({ length: d }, () => uniform());
      } else {
        position = position.map((value) =>
          clamp(value + WALK_STEP * gaussian())
        );
      }
      return [...position];
    },
    tell: () => {},
  };
}

function clamp(value: number): number {
  return Math.min(1, Math.max(0, value));
}
