/**
 * Feature-graph state shared over the guidance wire protocol.
 *
 * Each request from the simulator describes the aggregated region graph at
 * one step: 13 features per region node and 4 features per directed edge
 * (edges are sent as [src, dst, length, proximity, demand hint, load]).
 * Replies are probability vectors over the same node ordering.
 */

export const NODE_FEATURES = 13;
export const EDGE_FIELDS = 6;

/** Reply tolerance mirrored from the simulator's protocol contract. */
export const SIMPLEX_TOLERANCE = 1e-6;

/** Raised when an incoming protocol message fails validation. */
export class ProtocolError extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'ProtocolError';
  }
}

/** One parsed guidance request. */
export interface FeatureGraph {
  t: number;
  nFree: number;
  /** Region count (nodes in the aggregated graph). */
  n: number;
  /** Row-major n x NODE_FEATURES. */
  nodeFeats: Float64Array;
  edgeSrc: Int32Array;
  edgeDst: Int32Array;
  /** Row-major m x (EDGE_FIELDS - 2). */
  edgeFeats: Float64Array;
}

/** Reward ingredients the simulator appends once a progress window closes. */
export interface RewardBlock {
  rewardT: number;
  completions: number;
  /** [agent id, steps from rewardT to completion, or -1 if censored]. */
  active: Array<[number, number]>;
}

function isInt(value: unknown): value is number {
  return typeof value === 'number' && Number.isInteger(value);
}

function isFiniteNumber(value: unknown): value is number {
  return typeof value === 'number' && Number.isFinite(value);
}

/** Validates and unpacks a guidance request object. */
export function parseGuidanceRequest(obj: unknown): FeatureGraph {
  if (typeof obj !== 'object' || obj === null || Array.isArray(obj)) {
    throw new ProtocolError('request is not an object');
  }
  const req = obj as Record<string, unknown>;
  if (!isInt(req.t) || req.t < 0) throw new ProtocolError("bad 't'");
  if (!isInt(req.n_free) || req.n_free < 0) throw new ProtocolError("bad 'n_free'");
  if (!Array.isArray(req.nodes) || req.nodes.length === 0) {
    throw new ProtocolError("'nodes' must be a non-empty list");
  }
  const n = req.nodes.length;
  const nodeFeats = new Float64Array(n * NODE_FEATURES);
  for (let i = 0; i < n; i++) {
    const row = req.nodes[i];
    if (!Array.isArray(row) || row.length !== NODE_FEATURES) {
      throw new ProtocolError(`node ${i} must have ${NODE_FEATURES} features`);
    }
    for (let j = 0; j < NODE_FEATURES; j++) {
      if (!isFiniteNumber(row[j])) {
        throw new ProtocolError(`node ${i} feature ${j} is not finite`);
      }
      nodeFeats[i * NODE_FEATURES + j] = row[j];
    }
  }
  if (!Array.isArray(req.edges)) throw new ProtocolError("'edges' must be a list");
  const m = req.edges.length;
  const edgeSrc = new Int32Array(m);
  const edgeDst = new Int32Array(m);
  const edgeFeats = new Float64Array(m * (EDGE_FIELDS - 2));
  for (let e = 0; e < m; e++) {
    const row = req.edges[e];
    if (!Array.isArray(row) || row.length !== EDGE_FIELDS) {
      throw new ProtocolError(`edge ${e} must have ${EDGE_FIELDS} fields`);
    }
    const [src, dst] = row;
    if (!isInt(src) || src < 0 || src >= n || !isInt(dst) || dst < 0 || dst >= n) {
      throw new ProtocolError(`edge ${e} endpoints out of range`);
    }
    edgeSrc[e] = src;
    edgeDst[e] = dst;
    for (let j = 2; j < EDGE_FIELDS; j++) {
      if (!isFiniteNumber(row[j])) {
        throw new ProtocolError(`edge ${e} feature ${j - 2} is not finite`);
      }
      edgeFeats[e * (EDGE_FIELDS - 2) + (j - 2)] = row[j];
    }
  }
  return { t: req.t, nFree: req.n_free, n, nodeFeats, edgeSrc, edgeDst, edgeFeats };
}

/** Extracts the optional reward block from a training-mode request. */
export function parseRewardBlock(obj: unknown): RewardBlock | null {
  const req = obj as Record<string, unknown>;
  if (req.reward_t === undefined) return null;
  if (!isInt(req.reward_t) || req.reward_t < 0) throw new ProtocolError("bad 'reward_t'");
  if (!isInt(req.completions) || req.completions < 0) {
    throw new ProtocolError("bad 'completions'");
  }
  if (!Array.isArray(req.active)) throw new ProtocolError("'active' must be a list");
  const active: Array<[number, number]> = [];
  for (const entry of req.active) {
    if (!Array.isArray(entry) || entry.length !== 2 || !isInt(entry[0]) || !isInt(entry[1])) {
      throw new ProtocolError("bad 'active' entry");
    }
    active.push([entry[0], entry[1]]);
  }
  return { rewardT: req.reward_t, completions: req.completions, active };
}

/** Checks a probability vector: finite, nonnegative, sums to 1 within tol. */
export function isSimplex(probs: ArrayLike<number>, tol = SIMPLEX_TOLERANCE): boolean {
  let total = 0;
  for (let i = 0; i < probs.length; i++) {
    const p = probs[i];
    if (!Number.isFinite(p) || p < 0) return false;
    total += p;
  }
  return Math.abs(total - 1) <= tol;
}
