/**
 * Shared test fixtures: seeded random guidance requests and graphs.
 */

import { NODE_FEATURES, parseGuidanceRequest, type FeatureGraph } from '../src/graph.js';
import { Rng } from '../src/rng.js';

/** Raw wire-shape request with k nodes on a sparse random digraph. */
export function randomRequest(k: number, rng: Rng, t = 0): Record<string, unknown> {
  const nodes: number[][] = [];
  for (let i = 0; i < k; i++) {
    const row: number[] = [];
    for (let j = 0; j < NODE_FEATURES; j++) row.push(rng.uniform());
    nodes.push(row);
  }
  const edges: number[][] = [];
  for (let i = 0; i < k; i++) {
    const degree = 1 + rng.int(3);
    for (let d = 0; d < degree; d++) {
      const j = rng.int(k);
      if (j === i) continue;
      edges.push([i, j, 1 + rng.int(9), rng.uniform(), rng.uniform() * 2 - 1, rng.uniform()]);
    }
  }
  return { t, n_free: rng.int(20), nodes, edges };
}

/** Parsed random graph. */
export function randomGraph(k: number, rng: Rng, t = 0): FeatureGraph {
  return parseGuidanceRequest(randomRequest(k, rng, t));
}

/** Applies a node permutation to a raw request (perm[i] = new index of i). */
export function permuteRequest(
  req: Record<string, unknown>,
  perm: number[],
): Record<string, unknown> {
  const nodes = req.nodes as number[][];
  const edges = req.edges as number[][];
  const newNodes: number[][] = new Array(nodes.length);
  for (let i = 0; i < nodes.length; i++) newNodes[perm[i]] = nodes[i];
  const newEdges = edges.map((e) => [perm[e[0]], perm[e[1]], ...e.slice(2)]);
  // Edge order is also shuffled to confirm it carries no information.
  newEdges.reverse();
  return { ...req, nodes: newNodes, edges: newEdges };
}

/** Fisher-Yates permutation of 0..n-1. */
export function randomPermutation(n: number, rng: Rng): number[] {
  const perm = Array.from({ length: n }, (_, i) => i);
  for (let i = n - 1; i > 0; i--) {
    const j = rng.int(i + 1);
    [perm[i], perm[j]] = [perm[j], perm[i]];
  }
  return perm;
}
