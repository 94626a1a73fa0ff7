/**
 * Adam optimizer over tape parameters.
 */

import type { Tensor } from './tensor.js';

export class Adam {
  private readonly m: Float64Array[];
  private readonly v: Float64Array[];
  private step_ = 0;

  constructor(
    readonly params: Tensor[],
    readonly lr: number,
    readonly beta1 = 0.9,
    readonly beta2 = 0.999,
    readonly eps = 1e-8,
  ) {
    this.m = params.map((p) => new Float64Array(p.size));
    this.v = params.map((p) => new Float64Array(p.size));
  }

  /** Clears accumulated gradients on the managed parameters. */
  zeroGrad(): void {
    for (const p of this.params) p.ensureGrad().fill(0);
  }

  /**
   * Applies one Adam step from the current gradients, with an optional
   * multiplier on the learning rate (for schedules).
   */
  step(lrScale = 1): void {
    this.step_ += 1;
    const correction1 = 1 - Math.pow(this.beta1, this.step_);
    const correction2 = 1 - Math.pow(this.beta2, this.step_);
    for (let k = 0; k < this.params.length; k++) {
      const p = this.params[k];
      const g = p.ensureGrad();
      const m = this.m[k];
      const v = this.v[k];
      for (let i = 0; i < g.length; i++) {
        m[i] = this.beta1 * m[i] + (1 - this.beta1) * g[i];
        v[i] = this.beta2 * v[i] + (1 - this.beta2) * g[i] * g[i];
        const mHat = m[i] / correction1;
        const vHat = v[i] / correction2;
        p.data[i] -= (this.lr * lrScale * mHat) / (Math.sqrt(vHat) + this.eps);
      }
    }
  }
}
