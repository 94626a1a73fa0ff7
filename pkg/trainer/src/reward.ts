/**
 * Shaped step reward from a closed progress window.
 *
 * r_t = c1 * r_fin + c2 * r_fut, where r_fin counts task completions at
 * step t and r_fut credits each agent actively assigned at t with
 * phi(delay) for the delay until its task completed. Assignments still
 * unfinished when the window closes are censored and contribute
 * phi(window length), which keeps the reward finite.
 */

/** Raised when a reward is requested over an empty window. */
export class WindowTooShort extends Error {
  constructor(message = 'progress window is empty') {
    super(message);
    this.name = 'WindowTooShort';
  }
}

/** Decay shape for future-progress credit. */
export type PhiSpec =
  | { kind: 'inverse' }
  | { kind: 'exponential'; kappa: number };

/** Builds the decay function phi from its spec. */
export function makePhi(spec: PhiSpec): (t: number) => number {
  if (spec.kind === 'inverse') return (t) => 1 / (1 + t);
  const kappa = spec.kappa;
  if (!(kappa > 0)) throw new Error('exponential phi needs kappa > 0');
  return (t) => Math.exp(-t / kappa);
}

/** Everything observed about step t once its window has closed. */
export interface TraceWindow {
  /** Window length in steps; every active assignment resolved within it. */
  length: number;
  /** Tasks completed during step t. */
  completions: number;
  /** Per actively-assigned agent: delay to completion, or -1 if censored. */
  activeDelays: number[];
}

/** Weighted completion-plus-progress reward for one step. */
export function computeReward(
  window: TraceWindow,
  c1: number,
  c2: number,
  phi: PhiSpec,
): number {
  if (!(window.length >= 1)) throw new WindowTooShort();
  const decay = makePhi(phi);
  let future = 0;
  for (const delay of window.activeDelays) {
    future += decay(delay >= 0 ? delay : window.length);
  }
  return c1 * window.completions + c2 * future;
}
