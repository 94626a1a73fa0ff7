/**
 * Deterministic pseudo-random number generation.
 *
 * Everything stochastic in this package (weight init, Dirichlet sampling,
 * replay sampling, synthetic test fixtures) draws from an explicit Rng so
 * runs are reproducible given a seed.
 */

/** Mixes a 32-bit seed into a well-spread initial state (splitmix32). */
function splitmix32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x9e3779b9) >>> 0;
    let z = state;
    z = Math.imul(z ^ (z >>> 16), 0x21f0aaad);
    z = Math.imul(z ^ (z >>> 15), 0x735a2d97);
    z = z ^ (z >>> 15);
    return z >>> 0;
  };
}

/** Seeded generator with uniform, integer, and Gaussian draws. */
export class Rng {
  private next32: () => number;
  private spare: number | null = null;

  constructor(seed: number) {
    this.next32 = splitmix32(seed | 0);
  }

  /** Uniform float in [0, 1). */
  uniform(): number {
    return this.next32() / 4294967296;
  }

  /** Uniform float in (0, 1); never returns an exact zero. */
  uniformOpen(): number {
    let u = this.uniform();
    while (u === 0) u = this.uniform();
    return u;
  }

  /** Uniform integer in [0, n). */
  int(n: number): number {
    return Math.floor(this.uniform() * n);
  }

  /** Standard normal via Box-Muller, caching the spare draw. */
  normal(): number {
    if (this.spare !== null) {
      const value = this.spare;
      this.spare = null;
      return value;
    }
    const u = this.uniformOpen();
    const v = this.uniform();
    const radius = Math.sqrt(-2 * Math.log(u));
    const angle = 2 * Math.PI * v;
    this.spare = radius * Math.sin(angle);
    return radius * Math.cos(angle);
  }

  /** Derives an independent child generator, e.g. one per episode. */
  child(stream: number): Rng {
    return new Rng((this.next32() ^ Math.imul(stream + 1, 0x85ebca6b)) | 0);
  }
}
