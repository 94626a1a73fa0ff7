import { describe, expect, it } from 'vitest';

import {
  dirichletEntropy,
  dirichletEntropyOp,
  dirichletLogPdf,
  dirichletLogProbOp,
  dirichletMean,
  sampleDirichlet,
  sampleGamma,
} from '../src/dirichlet.js';
import { lgamma } from '../src/numerics.js';
import { Rng } from '../src/rng.js';
import { parameter } from '../src/tensor.js';

describe('sampleGamma', () => {
  it('matches gamma mean and variance for shape >= 1', () => {
    const rng = new Rng(42);
    const shape = 2.5;
    const n = 20000;
    let sum = 0;
    let sumSq = 0;
    for (let i = 0; i < n; i++) {
      const x = sampleGamma(shape, rng);
      sum += x;
      sumSq += x * x;
    }
    const mean = sum / n;
    const variance = sumSq / n - mean * mean;
    expect(mean).toBeGreaterThan(shape * 0.95);
    expect(mean).toBeLessThan(shape * 1.05);
    expect(variance).toBeGreaterThan(shape * 0.9);
    expect(variance).toBeLessThan(shape * 1.1);
  });

  it('matches the mean for shape < 1 (boosted path)', () => {
    const rng = new Rng(43);
    const shape = 0.3;
    const n = 40000;
    let sum = 0;
    for (let i = 0; i < n; i++) sum += sampleGamma(shape, rng);
    expect(sum / n).toBeGreaterThan(shape * 0.93);
    expect(sum / n).toBeLessThan(shape * 1.07);
    expect(() => sampleGamma(0, rng)).toThrow(/positive/);
  });
});

describe('sampleDirichlet', () => {
  it('always lands on the simplex within 1e-6', () => {
    const rng = new Rng(7);
    for (let trial = 0; trial < 200; trial++) {
      const k = 1 + rng.int(40);
      const conc: number[] = [];
      for (let i = 0; i < k; i++) conc.push(0.02 + rng.uniform() * 8);
      const draw = sampleDirichlet(conc, rng);
      let total = 0;
      for (const p of draw) {
        expect(p).toBeGreaterThanOrEqual(0);
        expect(Number.isFinite(p)).toBe(true);
        total += p;
      }
      expect(Math.abs(total - 1)).toBeLessThan(1e-6);
    }
  });

  it('concentrates around the Dirichlet mean', () => {
    const rng = new Rng(8);
    const conc = [4, 2, 2];
    const acc = [0, 0, 0];
    const n = 20000;
    for (let i = 0; i < n; i++) {
      const draw = sampleDirichlet(conc, rng);
      for (let j = 0; j < 3; j++) acc[j] += draw[j];
    }
    expect(acc[0] / n).toBeCloseTo(0.5, 2);
    expect(acc[1] / n).toBeCloseTo(0.25, 2);
    expect(acc[2] / n).toBeCloseTo(0.25, 2);
  });
});

describe('dirichletMean', () => {
  it('normalizes concentrations', () => {
    const mean = dirichletMean([2, 6]);
    expect(mean[0]).toBeCloseTo(0.25, 12);
    expect(mean[1]).toBeCloseTo(0.75, 12);
  });
});

describe('dirichletLogPdf', () => {
  it('is log Gamma(k) for the uniform Dirichlet', () => {
    // Dir(1,..,1) has constant density Gamma(k) on the simplex.
    expect(dirichletLogPdf([1, 1, 1], [0.2, 0.3, 0.5])).toBeCloseTo(Math.log(2), 10);
    expect(dirichletLogPdf([1, 1, 1], [0.9, 0.05, 0.05])).toBeCloseTo(Math.log(2), 10);
    expect(dirichletLogPdf([1, 1, 1, 1], [0.25, 0.25, 0.25, 0.25])).toBeCloseTo(
      lgamma(4),
      10,
    );
  });

  it('matches the closed form for Dir(2,1)', () => {
    // pdf(x) = 2 * x1.
    expect(dirichletLogPdf([2, 1], [0.7, 0.3])).toBeCloseTo(Math.log(2 * 0.7), 10);
  });
});

describe('dirichletEntropy', () => {
  it('is zero for the uniform distribution on the 1-simplex', () => {
    expect(dirichletEntropy([1, 1])).toBeCloseTo(0, 12);
  });

  it('agrees with Monte-Carlo negative mean log density', () => {
    const rng = new Rng(9);
    const conc = [2.5, 1.2, 3.3];
    let acc = 0;
    const n = 30000;
    for (let i = 0; i < n; i++) {
      acc += dirichletLogPdf(conc, sampleDirichlet(conc, rng));
    }
    expect(dirichletEntropy(conc)).toBeCloseTo(-acc / n, 1);
  });
});

describe('tape ops', () => {
  it('dirichletLogProbOp gradient matches finite differences', () => {
    const conc = [1.8, 0.7, 2.4];
    const x = Float64Array.from([0.5, 0.2, 0.3]);
    const tensor = parameter(conc, 3, 1);
    dirichletLogProbOp(tensor, x).backward();
    const h = 1e-6;
    for (let i = 0; i < 3; i++) {
      const up = [...conc];
      const down = [...conc];
      up[i] += h;
      down[i] -= h;
      const numeric = (dirichletLogPdf(up, x) - dirichletLogPdf(down, x)) / (2 * h);
      expect(tensor.grad![i]).toBeCloseTo(numeric, 5);
    }
  });

  it('dirichletEntropyOp gradient matches finite differences', () => {
    const conc = [0.9, 3.1, 1.6, 2.2];
    const tensor = parameter(conc, 4, 1);
    dirichletEntropyOp(tensor).backward();
    const h = 1e-6;
    for (let i = 0; i < 4; i++) {
      const up = [...conc];
      const down = [...conc];
      up[i] += h;
      down[i] -= h;
      const numeric = (dirichletEntropy(up) - dirichletEntropy(down)) / (2 * h);
      expect(tensor.grad![i]).toBeCloseTo(numeric, 5);
    }
  });
});
