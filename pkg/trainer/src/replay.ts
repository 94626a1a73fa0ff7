/**
 * Delayed-transition bookkeeping and replay storage.
 *
 * The future-progress part of the reward for step t is only known once the
 * progress window [t, t + W] has closed, so transitions are parked in a
 * pending log and enter the replay buffer only when their reward block
 * arrives. The buffer never holds a transition with an open window.
 */

import type { FeatureGraph } from './graph.js';
import { Rng } from './rng.js';

/** A complete (s_t, a_t, r_t, s_{t+1}) sample with a finalized reward. */
export interface DelayedTransition {
  state: FeatureGraph;
  /** Sampled guidance distribution replied at state.t. */
  action: Float64Array;
  reward: number;
  nextState: FeatureGraph;
  /** True when state.t was the last reward-bearing step of its episode. */
  terminal: boolean;
}

/** Episode-scoped log that releases transitions as windows close. */
export class DelayedTransitionLog {
  private actions = new Map<number, Float64Array>();
  private states = new Map<number, FeatureGraph>();

  /** Records the action taken at step t. */
  record(state: FeatureGraph, action: Float64Array): void {
    this.states.set(state.t, state);
    this.actions.set(state.t, action);
  }

  /** Number of steps whose windows are still open. */
  get pendingCount(): number {
    return this.actions.size;
  }

  /**
   * Finalizes step rewardT once its window has closed. Returns null when
   * the step was never acted on (e.g. reward blocks for steps handled by a
   * fallback after a protocol fault).
   */
  close(rewardT: number, reward: number, terminal: boolean): DelayedTransition | null {
    const state = this.states.get(rewardT);
    const action = this.actions.get(rewardT);
    const nextState = this.states.get(rewardT + 1);
    if (state === undefined || action === undefined || nextState === undefined) {
      return null;
    }
    this.actions.delete(rewardT);
    return { state, action, reward, nextState, terminal };
  }
}

/** Fixed-capacity ring buffer with uniform sampling. */
export class ReplayBuffer {
  private items: DelayedTransition[] = [];
  private cursor = 0;

  constructor(readonly capacity: number) {
    if (!(capacity >= 1)) throw new Error('replay capacity must be >= 1');
  }

  get size(): number {
    return this.items.length;
  }

  push(transition: DelayedTransition): void {
    if (this.items.length < this.capacity) {
      this.items.push(transition);
    } else {
      this.items[this.cursor] = transition;
      this.cursor = (this.cursor + 1) % this.capacity;
    }
  }

  /** Uniform sample with replacement. */
  sample(batchSize: number, rng: Rng): DelayedTransition[] {
    if (this.items.length === 0) throw new Error('replay buffer is empty');
    const batch: DelayedTransition[] = [];
    for (let i = 0; i < batchSize; i++) {
      batch.push(this.items[rng.int(this.items.length)]);
    }
    return batch;
  }
}
