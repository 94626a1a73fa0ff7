import { describe, expect, it } from 'vitest';

import { sampleDirichlet } from '../src/dirichlet.js';
import { parseGuidanceRequest } from '../src/graph.js';
import { DEFAULT_HYPER, GuidancePolicy } from '../src/policy.js';
import { Rng } from '../src/rng.js';
import { permuteRequest, randomGraph, randomPermutation, randomRequest } from './helpers.js';

describe('actor output', () => {
  it('concentrations are strictly positive and floored', () => {
    const policy = new GuidancePolicy(DEFAULT_HYPER, 3);
    const rng = new Rng(100);
    for (let trial = 0; trial < 25; trial++) {
      const graph = randomGraph(1 + rng.int(60), rng);
      const conc = policy.inferConcentrations(graph);
      expect(conc.length).toBe(graph.n);
      for (const a of conc) {
        expect(Number.isFinite(a)).toBe(true);
        expect(a).toBeGreaterThanOrEqual(DEFAULT_HYPER.concFloor);
      }
    }
  });

  it('sampled actions lie on the simplex within 1e-6', () => {
    const policy = new GuidancePolicy(DEFAULT_HYPER, 4);
    const rng = new Rng(101);
    for (let trial = 0; trial < 50; trial++) {
      const graph = randomGraph(2 + rng.int(40), rng);
      const action = sampleDirichlet(policy.inferConcentrations(graph), rng);
      let total = 0;
      for (const p of action) {
        expect(p).toBeGreaterThanOrEqual(0);
        total += p;
      }
      expect(Math.abs(total - 1)).toBeLessThan(1e-6);
    }
  });

  it('fresh policies start near the uniform Dirichlet', () => {
    // softplus(bias) + floor is calibrated to 1 at init; the graph term
    // perturbs it, but concentrations should stay order-1.
    const policy = new GuidancePolicy(DEFAULT_HYPER, 5);
    const graph = randomGraph(20, new Rng(102));
    for (const a of policy.inferConcentrations(graph)) {
      expect(a).toBeGreaterThan(0.1);
      expect(a).toBeLessThan(10);
    }
  });

  it('handles a single-region graph with no edges', () => {
    const graph = parseGuidanceRequest({
      t: 0,
      n_free: 2,
      nodes: [Array(13).fill(0.5)],
      edges: [],
    });
    const policy = new GuidancePolicy(DEFAULT_HYPER, 6);
    const conc = policy.inferConcentrations(graph);
    expect(conc.length).toBe(1);
    expect(conc[0]).toBeGreaterThan(0);
  });
});

describe('permutation symmetry', () => {
  it('encoder is permutation equivariant', () => {
    const policy = new GuidancePolicy(DEFAULT_HYPER, 7);
    const rng = new Rng(103);
    for (let trial = 0; trial < 10; trial++) {
      const k = 3 + rng.int(50);
      const request = randomRequest(k, rng);
      const perm = randomPermutation(k, rng);
      const base = policy.inferConcentrations(parseGuidanceRequest(request));
      const permuted = policy.inferConcentrations(
        parseGuidanceRequest(permuteRequest(request, perm)),
      );
      for (let i = 0; i < k; i++) {
        expect(permuted[perm[i]]).toBeCloseTo(base[i], 9);
      }
    }
  });

  it('critic is permutation invariant', () => {
    const policy = new GuidancePolicy(DEFAULT_HYPER, 8);
    const rng = new Rng(104);
    for (let trial = 0; trial < 10; trial++) {
      const k = 3 + rng.int(30);
      const request = randomRequest(k, rng);
      const graph = parseGuidanceRequest(request);
      const action = sampleDirichlet(policy.inferConcentrations(graph), rng);
      const perm = randomPermutation(k, rng);
      const permutedAction = new Float64Array(k);
      for (let i = 0; i < k; i++) permutedAction[perm[i]] = action[i];
      const permutedGraph = parseGuidanceRequest(permuteRequest(request, perm));
      expect(policy.mainQ(permutedGraph, permutedAction)).toBeCloseTo(
        policy.mainQ(graph, action),
        9,
      );
      expect(policy.targetQ(permutedGraph, permutedAction)).toBeCloseTo(
        policy.targetQ(graph, action),
        9,
      );
    }
  });
});

describe('determinism and checkpoints', () => {
  it('same seed builds identical policies', () => {
    const a = new GuidancePolicy(DEFAULT_HYPER, 9);
    const b = new GuidancePolicy(DEFAULT_HYPER, 9);
    const graph = randomGraph(25, new Rng(105));
    expect(a.inferConcentrations(graph)).toEqual(b.inferConcentrations(graph));
    expect(JSON.stringify(a.toCheckpoint())).toBe(JSON.stringify(b.toCheckpoint()));
  });

  it('different seeds build different policies', () => {
    const a = new GuidancePolicy(DEFAULT_HYPER, 10);
    const b = new GuidancePolicy(DEFAULT_HYPER, 11);
    const graph = randomGraph(25, new Rng(106));
    expect(a.inferConcentrations(graph)).not.toEqual(b.inferConcentrations(graph));
  });

  it('checkpoints round-trip exactly', () => {
    const policy = new GuidancePolicy(DEFAULT_HYPER, 12);
    const doc = JSON.parse(JSON.stringify(policy.toCheckpoint()));
    const restored = GuidancePolicy.fromCheckpoint(doc);
    const graph = randomGraph(30, new Rng(107));
    expect(restored.inferConcentrations(graph)).toEqual(policy.inferConcentrations(graph));
    const action = sampleDirichlet(policy.inferConcentrations(graph), new Rng(1));
    expect(restored.mainQ(graph, action)).toBe(policy.mainQ(graph, action));
  });

  it('checkpoints are self-describing', () => {
    const policy = new GuidancePolicy(DEFAULT_HYPER, 13);
    const doc = policy.toCheckpoint();
    expect(doc.format).toBe('guidance-policy');
    expect(doc.version).toBe(1);
    expect(doc.hyper).toEqual(DEFAULT_HYPER);
    expect(doc.seed).toBe(13);
    expect(doc.episodesTrained).toBe(0);
    expect(Object.keys(doc.params).length).toBeGreaterThan(0);
  });

  it('rejects foreign checkpoint documents', () => {
    expect(() => GuidancePolicy.fromCheckpoint({ format: 'other' } as never)).toThrow(
      /format/,
    );
    const policy = new GuidancePolicy(DEFAULT_HYPER, 14);
    const doc = policy.toCheckpoint();
    doc.params['actor.w'] = [1];
    expect(() => GuidancePolicy.fromCheckpoint(doc)).toThrow(/wrong size/);
  });
});

describe('target network', () => {
  it('polyak update moves targets toward main parameters', () => {
    const policy = new GuidancePolicy(DEFAULT_HYPER, 15);
    const name = 'q1.w1';
    const main = policy.params.get(name)!;
    const target = policy.targetParams.get(name)!;
    main.data[0] += 1;
    const before = target.data[0];
    policy.updateTargets(0.25);
    expect(target.data[0]).toBeCloseTo(before + 0.25, 12);
    expect(policy.targetParams.has('actor.w')).toBe(false);
  });
});
