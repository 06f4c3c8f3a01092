/**
 * Small deterministic PRNG so audited runs are reproducible from a
 * seed alone. splitmix32 is enough here: the client only drives toy
 * strategies, not statistics.
 */

export type UniformSource = () => number;

/** Uniform numbers in [0, 1) from a 32-bit splitmix counter. */
export function splitmix32(seed: number): UniformSource {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x9e3779b9) >>> 0;
    let z = state;
    z = Math.imul(z ^ (z >>> 16), 0x21f0aaad);
    z = Math.imul(z ^ (z >>> 15), 0x735a2d97);
    z ^= z >>> 15;
    return (z >>> 0) / 4294967296;
  };
}

/** Standard normal draws via Box-Muller on a uniform source. */
export function gaussianSource(uniform: UniformSource): UniformSource {
  let spare: number | null = null;
  return () => {
    if (spare !== null) {
      const value = spare;
      spare = null;
      return value;
    }
    let u = 0;
    while (u === 0) {
      u = uniform(); // log(0) is -Infinity
    }
    const radius = Math.sqrt(-2 * Math.log(u));
    const angle = 2 * Math.PI * uniform();
    spare = radius * Math.sin(angle);
    return radius * Math.cos(angle);
  };
}
