/**
 * Serving-latency benchmark: answers synthetic guidance requests with a
 * freshly initialized policy and reports latency percentiles per graph
 * size. Run with `npm run bench`.
 */

import { NODE_FEATURES } from './graph.js';
import { DEFAULT_HYPER, GuidancePolicy } from './policy.js';
import { Rng } from './rng.js';
import { answerRequest } from './serve.js';

function syntheticRequest(k: number, rng: Rng, t: number): string {
  const nodes: number[][] = [];
  const edges: number[][] = [];
  for (let i = 0; i < k; i++) {
    nodes.push(Array.from({ length: NODE_FEATURES }, () => rng.uniform()));
    const degree = 1 + rng.int(3);
    for (let d = 0; d < degree; d++) {
      const dst = rng.int(k);
      if (dst === i) continue;
      edges.push([i, dst, 1 + rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()]);
    }
  }
  return JSON.stringify({ t, n_free: rng.int(8), nodes, edges });
}

function percentile(sorted: number[], q: number): number {
  const idx = Math.min(sorted.length - 1, Math.floor(q * sorted.length));
  return sorted[idx];
}

function run(policy: GuidancePolicy, k: number, requests: number, rng: Rng): void {
  const lines: string[] = [];
  for (let i = 0; i < requests; i++) lines.push(syntheticRequest(k, rng, i));

  // Warm-up pass so JIT compilation does not land in the measurement.
  for (let i = 0; i < 20; i++) answerRequest(policy, JSON.parse(lines[i % lines.length]));

  const latencies: number[] = [];
  for (const line of lines) {
    const start = process.hrtime.bigint();
    const reply = answerRequest(policy, JSON.parse(line));
    const elapsed = Number(process.hrtime.bigint() - start) / 1e6;
    if ('error' in reply) throw new Error(`unexpected error reply: ${reply.error}`);
    latencies.push(elapsed);
  }
  latencies.sort((a, b) => a - b);
  console.log(
    `k=${k} requests=${requests} ` +
      `median=${percentile(latencies, 0.5).toFixed(2)}ms ` +
      `p90=${percentile(latencies, 0.9).toFixed(2)}ms ` +
      `p99=${percentile(latencies, 0.99).toFixed(2)}ms ` +
      `max=${latencies[latencies.length - 1].toFixed(2)}ms`,
  );
}

const policy = new GuidancePolicy(DEFAULT_HYPER, 0);
const rng = new Rng(17);
for (const k of [30, 120, 200]) {
  run(policy, k, 500, rng);
}
