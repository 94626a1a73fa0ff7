import { describe, expect, it } from 'vitest';

import { WindowTooShort, computeReward, makePhi } from '../src/reward.js';

describe('makePhi', () => {
  it('inverse decay is 1/(1+t)', () => {
    const phi = makePhi({ kind: 'inverse' });
    expect(phi(0)).toBe(1);
    expect(phi(3)).toBeCloseTo(0.25, 12);
  });

  it('exponential decay is exp(-t/kappa)', () => {
    const phi = makePhi({ kind: 'exponential', kappa: 3 });
    expect(phi(0)).toBe(1);
    expect(phi(3)).toBeCloseTo(Math.exp(-1), 12);
    expect(() => makePhi({ kind: 'exponential', kappa: 0 })).toThrow(/kappa/);
  });
});

describe('computeReward', () => {
  it('counts completions alone when c2 is zero', () => {
    const r = computeReward(
      { length: 10, completions: 2, activeDelays: [0, 4, -1] },
      1,
      0,
      { kind: 'inverse' },
    );
    expect(r).toBe(2);
  });

  it('an agent completing exactly at t contributes phi(0) = 1', () => {
    const r = computeReward(
      { length: 10, completions: 1, activeDelays: [0] },
      0,
      1,
      { kind: 'inverse' },
    );
    expect(r).toBeCloseTo(1, 12);
  });

  it('a completion 3 steps later contributes exp(-1) with kappa 3', () => {
    const r = computeReward(
      { length: 10, completions: 0, activeDelays: [3] },
      0,
      1,
      { kind: 'exponential', kappa: 3 },
    );
    expect(r).toBeCloseTo(Math.exp(-1), 12);
  });

  it('censored assignments contribute phi(window length)', () => {
    const r = computeReward(
      { length: 6, completions: 0, activeDelays: [-1, -1] },
      0,
      1,
      { kind: 'inverse' },
    );
    expect(r).toBeCloseTo(2 / 7, 12);
  });

  it('combines both terms with the configured weights', () => {
    const r = computeReward(
      { length: 8, completions: 3, activeDelays: [0, 2, -1] },
      1.5,
      0.5,
      { kind: 'inverse' },
    );
    const future = 1 + 1 / 3 + 1 / 9;
    expect(r).toBeCloseTo(1.5 * 3 + 0.5 * future, 12);
  });

  it('raises WindowTooShort on an empty window', () => {
    expect(() =>
      computeReward({ length: 0, completions: 0, activeDelays: [] }, 1, 1, { kind: 'inverse' }),
    ).toThrow(WindowTooShort);
  });
});
