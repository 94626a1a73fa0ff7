import { describe, expect, it } from 'vitest';

import { DelayedTransitionLog, ReplayBuffer } from '../src/replay.js';
import { Rng } from '../src/rng.js';
import { randomGraph } from './helpers.js';

function uniformAction(k: number): Float64Array {
  return new Float64Array(k).fill(1 / k);
}

describe('DelayedTransitionLog', () => {
  it('releases a transition only when its window closes', () => {
    const rng = new Rng(50);
    const log = new DelayedTransitionLog();
    const buffer = new ReplayBuffer(100);
    const window = 4;
    const horizon = 10;
    // Steps arrive one at a time; the reward for step t - window arrives
    // with step t, mirroring the simulator's training protocol.
    for (let t = 0; t < horizon + window; t++) {
      const rewardT = t - window;
      if (rewardT >= 0 && rewardT < horizon) {
        const transition = log.close(rewardT, 1.5, rewardT === horizon - 1);
        expect(transition).not.toBeNull();
        buffer.push(transition!);
      }
      const graph = randomGraph(5, rng, t);
      log.record(graph, uniformAction(5));
      // Nothing enters replay before its window has closed.
      expect(buffer.size).toBe(Math.max(0, Math.min(t - window + 1, horizon)));
    }
    expect(buffer.size).toBe(horizon);
  });

  it('links each transition to the next recorded state', () => {
    const rng = new Rng(51);
    const log = new DelayedTransitionLog();
    const first = randomGraph(4, rng, 0);
    const second = randomGraph(4, rng, 1);
    log.record(first, uniformAction(4));
    log.record(second, uniformAction(4));
    const transition = log.close(0, 2.0, false)!;
    expect(transition.state).toBe(first);
    expect(transition.nextState).toBe(second);
    expect(transition.reward).toBe(2.0);
    expect(transition.terminal).toBe(false);
  });

  it('returns null for steps it never acted on', () => {
    const log = new DelayedTransitionLog();
    expect(log.close(3, 1.0, false)).toBeNull();
    const rng = new Rng(52);
    log.record(randomGraph(4, rng, 5), uniformAction(4));
    // No next state recorded yet, so the transition is incomplete.
    expect(log.close(5, 1.0, false)).toBeNull();
  });

  it('marks the final reward-bearing step terminal', () => {
    const rng = new Rng(53);
    const log = new DelayedTransitionLog();
    log.record(randomGraph(3, rng, 7), uniformAction(3));
    log.record(randomGraph(3, rng, 8), uniformAction(3));
    expect(log.close(7, 0.0, true)!.terminal).toBe(true);
  });
});

describe('ReplayBuffer', () => {
  function dummy(t: number) {
    const rng = new Rng(t);
    return {
      state: randomGraph(3, rng, t),
      action: uniformAction(3),
      reward: t,
      nextState: randomGraph(3, rng, t + 1),
      terminal: false,
    };
  }

  it('evicts oldest items beyond capacity', () => {
    const buffer = new ReplayBuffer(3);
    for (let t = 0; t < 5; t++) buffer.push(dummy(t));
    expect(buffer.size).toBe(3);
    const rng = new Rng(54);
    const rewards = new Set(buffer.sample(64, rng).map((item) => item.reward));
    // Items 0 and 1 were overwritten.
    expect(rewards.has(0)).toBe(false);
    expect(rewards.has(1)).toBe(false);
  });

  it('samples deterministically given a seeded generator', () => {
    const buffer = new ReplayBuffer(10);
    for (let t = 0; t < 10; t++) buffer.push(dummy(t));
    const a = buffer.sample(8, new Rng(55)).map((item) => item.reward);
    const b = buffer.sample(8, new Rng(55)).map((item) => item.reward);
    expect(a).toEqual(b);
  });

  it('rejects sampling when empty and bad capacities', () => {
    expect(() => new ReplayBuffer(0)).toThrow(/capacity/);
    const buffer = new ReplayBuffer(4);
    expect(() => buffer.sample(1, new Rng(56))).toThrow(/empty/);
  });
});
