/**
 * Guidance policy: graph-attention encoder with a Dirichlet actor head and
 * a permutation-invariant pooled critic head.
 *
 * The encoder stacks attention layers whose softmax normalizes only over
 * each node's in-neighborhood (neighborhood masking), so region order is
 * irrelevant: permuting the request permutes the reply identically. The
 * actor maps each node embedding to a strictly positive concentration
 * (softplus plus a floor); the critic mean-pools per-node features of
 * (embedding, action share) into a scalar Q. Twin critic heads share the
 * encoder and back the usual clipped double-Q target.
 */

import type { FeatureGraph } from './graph.js';
import { NODE_FEATURES } from './graph.js';
import { Rng } from './rng.js';
import type { PhiSpec } from './reward.js';
import {
  Tensor,
  add,
  addBias,
  addScalar,
  concatCols,
  constant,
  detach,
  gatherRows,
  leakyRelu,
  matmul,
  meanRows,
  parameter,
  scaleRows,
  segmentSoftmax,
  segmentSum,
  softplusT,
  tanhT,
} from './tensor.js';

/** Network and objective hyperparameters embedded in every checkpoint. */
export interface PolicyHyper {
  /** Encoder attention layers. */
  layers: number;
  /** Embedding width per layer. */
  width: number;
  /**
   * Entropy temperature numerator; the effective temperature on a
   * k-region graph is entropyWeight / k (see the updater notes). It
   * trades off against a unit-scale (RMS-normalized) advantage term, so
   * values near 1 pin the policy at the uniform concentration and values
   * well below 1 let the advantage signal shape it.
   */
  entropyWeight: number;
  actorLr: number;
  criticLr: number;
  /** Discount factor. */
  gamma: number;
  /** Polyak smoothing rate for target networks. */
  tau: number;
  /** Completion-reward weight c1. */
  c1: number;
  /** Future-progress weight c2. */
  c2: number;
  /** Decay shape for future-progress credit (kappa rides along for
   *  exponential decay). */
  phi: PhiSpec;
  /** Additive floor keeping concentrations strictly positive. */
  concFloor: number;
}

/**
 * Defaults: c1/c2 follow the documented grid search over
 * c1 in {0.5, 1.0, 2.0} x c2 in {0.0, 0.25, 0.5, 1.0}, which favored
 * (1.0, 0.5) on validation rollouts.
 */
export const DEFAULT_HYPER: PolicyHyper = {
  layers: 2,
  width: 16,
  entropyWeight: 0.01,
  actorLr: 3e-4,
  criticLr: 1e-3,
  gamma: 0.95,
  tau: 0.01,
  c1: 1.0,
  c2: 0.5,
  phi: { kind: 'inverse' },
  concFloor: 1e-3,
};

/** Self-describing checkpoint document. */
export interface Checkpoint {
  format: 'guidance-policy';
  version: 1;
  hyper: PolicyHyper;
  seed: number;
  episodesTrained: number;
  params: Record<string, number[]>;
}

type ParamMap = Map<string, Tensor>;

const CRITIC_HEADS = ['q1', 'q2'] as const;
export type CriticHead = (typeof CRITIC_HEADS)[number];

/** softplus(x) = 1 at this bias, so fresh policies start near Dir(1). */
const ACTOR_BIAS_INIT = 0.5413248546129181;

function xavier(rows: number, cols: number, rng: Rng): Tensor {
  const bound = Math.sqrt(6 / (rows + cols));
  const values = new Float64Array(rows * cols);
  for (let i = 0; i < values.length; i++) {
    values[i] = (2 * rng.uniform() - 1) * bound;
  }
  return parameter(values, rows, cols);
}

function zeros(rows: number, cols: number): Tensor {
  return parameter(new Float64Array(rows * cols), rows, cols);
}

export class GuidancePolicy {
  readonly hyper: PolicyHyper;
  readonly seed: number;
  episodesTrained = 0;
  /** Trainable parameters: encoder, actor head, critic heads. */
  readonly params: ParamMap = new Map();
  /** Polyak-averaged copies of encoder and critic heads for targets. */
  readonly targetParams: ParamMap = new Map();

  constructor(hyper: PolicyHyper, seed: number) {
    this.hyper = hyper;
    this.seed = seed;
    const rng = new Rng(seed);
    const w = hyper.width;
    for (let l = 0; l < hyper.layers; l++) {
      const dIn = l === 0 ? NODE_FEATURES : w;
      this.params.set(`enc.l${l}.wSelf`, xavier(dIn, w, rng));
      this.params.set(`enc.l${l}.wProj`, xavier(dIn, w, rng));
      this.params.set(`enc.l${l}.wEdge`, xavier(4, w, rng));
      this.params.set(`enc.l${l}.attnSrc`, xavier(w, 1, rng));
      this.params.set(`enc.l${l}.attnDst`, xavier(w, 1, rng));
      this.params.set(`enc.l${l}.attnEdge`, xavier(4, 1, rng));
      this.params.set(`enc.l${l}.bias`, zeros(1, w));
    }
    this.params.set('actor.w', xavier(w, 1, rng));
    const actorBias = zeros(1, 1);
    actorBias.data[0] = ACTOR_BIAS_INIT;
    this.params.set('actor.b', actorBias);
    for (const head of CRITIC_HEADS) {
      this.params.set(`${head}.w1`, xavier(w + 1, w, rng));
      this.params.set(`${head}.b1`, zeros(1, w));
      this.params.set(`${head}.w2`, xavier(w, 1, rng));
      this.params.set(`${head}.b2`, zeros(1, 1));
    }
    this.resetTargets();
  }

  /** Copies encoder and critic parameters into the target network. */
  resetTargets(): void {
    this.targetParams.clear();
    for (const [name, tensor] of this.params) {
      if (name.startsWith('actor.')) continue;
      this.targetParams.set(
        name,
        new Tensor(Float64Array.from(tensor.data), tensor.rows, tensor.cols),
      );
    }
  }

  /** Polyak update: target <- (1 - tau) * target + tau * main. */
  updateTargets(tau: number): void {
    for (const [name, target] of this.targetParams) {
      const main = this.params.get(name)!;
      for (let i = 0; i < target.data.length; i++) {
        target.data[i] += tau * (main.data[i] - target.data[i]);
      }
    }
  }

  /** Detached (tape-free) view of the main parameters, for inference. */
  private detachedParams(): ParamMap {
    const out: ParamMap = new Map();
    for (const [name, tensor] of this.params) out.set(name, detach(tensor));
    return out;
  }

  private encode(graph: FeatureGraph, P: ParamMap): Tensor {
    let h = constant(graph.nodeFeats, graph.n, NODE_FEATURES);
    const edgeFeats = constant(graph.edgeFeats, graph.edgeSrc.length, 4);
    for (let l = 0; l < this.hyper.layers; l++) {
      const projected = matmul(h, P.get(`enc.l${l}.wProj`)!);
      const selfPath = matmul(h, P.get(`enc.l${l}.wSelf`)!);
      const edgePath = matmul(edgeFeats, P.get(`enc.l${l}.wEdge`)!);
      // Additive attention score per edge. Source and destination parts
      // are per-node scalars gathered onto edges, which keeps the work on
      // the (dense) edge set down to vectors instead of width-sized rows.
      const srcScore = matmul(projected, P.get(`enc.l${l}.attnSrc`)!);
      const dstScore = matmul(projected, P.get(`enc.l${l}.attnDst`)!);
      const edgeScore = matmul(edgeFeats, P.get(`enc.l${l}.attnEdge`)!);
      const scores = leakyRelu(
        add(add(gatherRows(srcScore, graph.edgeSrc), gatherRows(dstScore, graph.edgeDst)), edgeScore),
      );
      const attention = segmentSoftmax(scores, graph.edgeDst, graph.n);
      const fromSrc = gatherRows(projected, graph.edgeSrc);
      const messages = scaleRows(add(fromSrc, edgePath), attention);
      const aggregated = segmentSum(messages, graph.edgeDst, graph.n);
      h = tanhT(addBias(add(selfPath, aggregated), P.get(`enc.l${l}.bias`)!));
    }
    return h;
  }

  private concFrom(embedding: Tensor, P: ParamMap): Tensor {
    const raw = addBias(matmul(embedding, P.get('actor.w')!), P.get('actor.b')!);
    return addScalar(softplusT(raw), this.hyper.concFloor);
  }

  /** Concentration vector a(s) on the tape (gradients flow to params). */
  concentrations(graph: FeatureGraph): Tensor {
    return this.concFrom(this.encode(graph, this.params), this.params);
  }

  /** Concentration vector a(s) without tape overhead. */
  inferConcentrations(graph: FeatureGraph): Float64Array {
    const P = this.detachedParams();
    return this.concFrom(this.encode(graph, P), P).data;
  }

  private qFrom(embedding: Tensor, action: ArrayLike<number>, head: CriticHead, P: ParamMap): Tensor {
    const n = embedding.rows;
    const actionCol = constant(action, n, 1);
    const joined = concatCols([embedding, actionCol]);
    const hidden = tanhT(addBias(matmul(joined, P.get(`${head}.w1`)!), P.get(`${head}.b1`)!));
    const pooled = meanRows(hidden);
    return addBias(matmul(pooled, P.get(`${head}.w2`)!), P.get(`${head}.b2`)!);
  }

  /** Q(s, a) on the tape for one critic head. */
  qValue(graph: FeatureGraph, action: ArrayLike<number>, head: CriticHead): Tensor {
    return this.qFrom(this.encode(graph, this.params), action, head, this.params);
  }

  /** min over target critic heads of Q'(s, a), tape-free. */
  targetQ(graph: FeatureGraph, action: ArrayLike<number>): number {
    const embedding = this.encode(graph, this.targetParams);
    let best = Infinity;
    for (const head of CRITIC_HEADS) {
      const q = this.qFrom(embedding, action, head, this.targetParams).item();
      if (q < best) best = q;
    }
    return best;
  }

  /** min over main critic heads of Q(s, a), tape-free. */
  mainQ(graph: FeatureGraph, action: ArrayLike<number>): number {
    return this.detachedEval(graph).minQ(action);
  }

  /**
   * Tape-free actor and critic views sharing one encoding pass, for the
   * rollout/scoring side of an update where no gradients are needed.
   */
  detachedEval(graph: FeatureGraph): {
    conc: Float64Array;
    minQ: (action: ArrayLike<number>) => number;
  } {
    const P = this.detachedParams();
    const embedding = this.encode(graph, P);
    return {
      conc: this.concFrom(embedding, P).data,
      minQ: (action) => {
        let best = Infinity;
        for (const head of CRITIC_HEADS) {
          const q = this.qFrom(embedding, action, head, P).item();
          if (q < best) best = q;
        }
        return best;
      },
    };
  }

  /** Both critic heads of Q(s, a) on one shared taped encoding. */
  criticPair(graph: FeatureGraph, action: ArrayLike<number>): [Tensor, Tensor] {
    const embedding = this.encode(graph, this.params);
    return [
      this.qFrom(embedding, action, 'q1', this.params),
      this.qFrom(embedding, action, 'q2', this.params),
    ];
  }

  /** Trainable tensors under a name prefix ('' for all). */
  parameterList(prefix: string): Tensor[] {
    const out: Tensor[] = [];
    for (const [name, tensor] of this.params) {
      if (name.startsWith(prefix)) out.push(tensor);
    }
    return out;
  }

  toCheckpoint(): Checkpoint {
    const params: Record<string, number[]> = {};
    for (const [name, tensor] of this.params) params[name] = Array.from(tensor.data);
    return {
      format: 'guidance-policy',
      version: 1,
      hyper: this.hyper,
      seed: this.seed,
      episodesTrained: this.episodesTrained,
      params,
    };
  }

  static fromCheckpoint(doc: Checkpoint): GuidancePolicy {
    if (doc.format !== 'guidance-policy' || doc.version !== 1) {
      throw new Error('unrecognized checkpoint format');
    }
    const policy = new GuidancePolicy(doc.hyper, doc.seed);
    policy.episodesTrained = doc.episodesTrained;
    for (const [name, values] of Object.entries(doc.params)) {
      const tensor = policy.params.get(name);
      if (tensor === undefined) throw new Error(`unknown parameter '${name}'`);
      if (tensor.data.length !== values.length) {
        throw new Error(`parameter '${name}' has wrong size`);
      }
      tensor.data.set(values);
    }
    policy.resetTargets();
    return policy;
  }
}
