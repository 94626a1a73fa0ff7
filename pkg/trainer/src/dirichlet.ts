/**
 * Dirichlet distribution utilities for the guidance actor.
 *
 * Actions are points on the simplex sampled from Dir(a) during training and
 * replaced by the mean a / sum(a) at serving time. Sampling goes through
 * gamma draws (Marsaglia-Tsang); log-density and entropy have closed forms
 * whose gradients with respect to the concentrations use digamma/trigamma,
 * exposed here as tape ops.
 */

import { digamma, lgamma, trigamma } from './numerics.js';
import { Rng } from './rng.js';
import { Tensor } from './tensor.js';

/** Gamma(shape, 1) draw via Marsaglia-Tsang squeeze, any shape > 0. */
export function sampleGamma(shape: number, rng: Rng): number {
  if (!(shape > 0)) throw new Error(`gamma shape must be positive, got ${shape}`);
  if (shape < 1) {
    // Boost: Gamma(s) = Gamma(s + 1) * U^(1/s).
    const boost = Math.pow(rng.uniformOpen(), 1 / shape);
    return sampleGamma(shape + 1, rng) * boost;
  }
  const d = shape - 1 / 3;
  const c = 1 / Math.sqrt(9 * d);
  for (;;) {
    let x: number;
    let v: number;
    do {
      x = rng.normal();
      v = 1 + c * x;
    } while (v <= 0);
    v = v * v * v;
    const u = rng.uniformOpen();
    if (u < 1 - 0.0331 * x * x * x * x) return d * v;
    if (Math.log(u) < 0.5 * x * x + d * (1 - v + Math.log(v))) return d * v;
  }
}

/** Draws alpha ~ Dir(a) by normalizing independent gamma variates. */
export function sampleDirichlet(conc: ArrayLike<number>, rng: Rng): Float64Array {
  const draw = new Float64Array(conc.length);
  let total = 0;
  for (let i = 0; i < conc.length; i++) {
    draw[i] = sampleGamma(conc[i], rng);
    total += draw[i];
  }
  if (total <= 0) {
    // All gamma draws underflowed; fall back to the mean direction.
    return dirichletMean(conc);
  }
  for (let i = 0; i < draw.length; i++) draw[i] /= total;
  return draw;
}

/** Dirichlet mean a / sum(a). */
export function dirichletMean(conc: ArrayLike<number>): Float64Array {
  const mean = new Float64Array(conc.length);
  let total = 0;
  for (let i = 0; i < conc.length; i++) total += conc[i];
  for (let i = 0; i < conc.length; i++) mean[i] = conc[i] / total;
  return mean;
}

/** log Dir(x; a) for x on the simplex (values clamped away from zero). */
export function dirichletLogPdf(conc: ArrayLike<number>, x: ArrayLike<number>): number {
  let total = 0;
  let value = 0;
  for (let i = 0; i < conc.length; i++) {
    const xi = Math.max(x[i], 1e-12);
    value += (conc[i] - 1) * Math.log(xi) - lgamma(conc[i]);
    total += conc[i];
  }
  return value + lgamma(total);
}

/** Differential entropy of Dir(a). */
export function dirichletEntropy(conc: ArrayLike<number>): number {
  const k = conc.length;
  let total = 0;
  for (let i = 0; i < k; i++) total += conc[i];
  let value = -lgamma(total) + (total - k) * digamma(total);
  for (let i = 0; i < k; i++) {
    value += lgamma(conc[i]) - (conc[i] - 1) * digamma(conc[i]);
  }
  return value;
}

/**
 * Tape op: log Dir(x; a) as a function of the concentration tensor a (nx1).
 * The sampled point x is treated as a constant.
 */
export function dirichletLogProbOp(conc: Tensor, x: Float64Array): Tensor {
  if (conc.cols !== 1) throw new Error('dirichletLogProbOp: nx1 expected');
  const value = dirichletLogPdf(conc.data, x);
  return Tensor.make(new Float64Array([value]), 1, 1, [conc], (out) => {
    const g = out.grad![0];
    const gc = conc.ensureGrad();
    let total = 0;
    for (let i = 0; i < conc.size; i++) total += conc.data[i];
    const psiTotal = digamma(total);
    for (let i = 0; i < conc.size; i++) {
      const xi = Math.max(x[i], 1e-12);
      gc[i] += g * (Math.log(xi) - digamma(conc.data[i]) + psiTotal);
    }
  });
}

/** Tape op: entropy of Dir(a) as a function of the concentration tensor. */
export function dirichletEntropyOp(conc: Tensor): Tensor {
  if (conc.cols !== 1) throw new Error('dirichletEntropyOp: nx1 expected');
  const k = conc.size;
  const value = dirichletEntropy(conc.data);
  return Tensor.make(new Float64Array([value]), 1, 1, [conc], (out) => {
    const g = out.grad![0];
    const gc = conc.ensureGrad();
    let total = 0;
    for (let i = 0; i < k; i++) total += conc.data[i];
    const common = (total - k) * trigamma(total);
    for (let i = 0; i < k; i++) {
      gc[i] += g * (common - (conc.data[i] - 1) * trigamma(conc.data[i]));
    }
  });
}
