/**
 * Soft actor-critic updates for the Dirichlet guidance policy.
 *
 * Critic: clipped double-Q regression toward
 *   y = r + gamma * (min Q'(s', a') - tau_ent * log pi(a'|s'))
 * with a' freshly sampled from the current actor. The critic loss trains
 * the shared encoder.
 *
 * Actor: Dirichlet samples are not cheaply reparameterizable, so the policy
 * gradient uses the score function. The baseline for a state is the value
 * of a second action sampled fresh from the same policy at that state:
 *   advantage_i = Q(s_i, a_i) - Q(s_i, a_i'),   a_i, a_i' ~ pi(.|s_i)
 *   L = -mean[advantage_i * log pi(a_i|s_i)] - tau_ent * mean H(Dir(a(s_i))).
 * E[grad log pi] = 0 keeps this unbiased, and conditioning on the state
 * removes cross-state value differences from the estimator, which would
 * otherwise drown the per-action credit (states differ in value far more
 * than actions do). Advantages are then normalized by their batch RMS and
 * clipped, so the strength of the policy-improvement term relative to the
 * entropy bonus does not depend on the critic's value scale. The actor
 * step touches only the actor head; the encoder follows the critics,
 * which keeps the two objectives from fighting over the trunk.
 *
 * Dirichlet log densities and entropies grow like lgamma(k) with the
 * number of regions k (hundreds of nats at k ~ 100), so the effective
 * temperature is entropyWeight / k: per-region entropy. Otherwise the
 * entropy term would drown the step rewards in the soft targets on any
 * realistically sized map.
 *
 * Each loss is backpropagated one transition at a time (gradients are
 * additive), so peak tape memory stays at a single encoding even on dense
 * region graphs.
 */

import { dirichletEntropyOp, dirichletLogPdf, dirichletLogProbOp, sampleDirichlet } from './dirichlet.js';
import { Adam } from './optim.js';
import type { GuidancePolicy } from './policy.js';
import type { DelayedTransition } from './replay.js';
import { Rng } from './rng.js';
import { add, constant, scale, square, sub } from './tensor.js';

/** Diagnostics from one gradient update. */
export interface SacStats {
  criticLoss: number;
  actorLoss: number;
  meanQ: number;
  meanEntropy: number;
}

export class SacUpdater {
  private readonly criticOpt: Adam;
  private readonly actorOpt: Adam;

  constructor(readonly policy: GuidancePolicy, private readonly rng: Rng) {
    const criticParams = [
      ...policy.parameterList('enc.'),
      ...policy.parameterList('q1.'),
      ...policy.parameterList('q2.'),
    ];
    this.criticOpt = new Adam(criticParams, policy.hyper.criticLr);
    this.actorOpt = new Adam(policy.parameterList('actor.'), policy.hyper.actorLr);
  }

  /** One gradient step on a replay batch. */
  update(batch: DelayedTransition[]): SacStats {
    const hyper = this.policy.hyper;
    const n = batch.length;

    // Bootstrapped soft targets, tape-free.
    const targets = new Float64Array(n);
    for (let i = 0; i < n; i++) {
      const item = batch[i];
      let bootstrap = 0;
      if (!item.terminal) {
        const nextConc = this.policy.inferConcentrations(item.nextState);
        const nextAction = sampleDirichlet(nextConc, this.rng);
        const logp = dirichletLogPdf(nextConc, nextAction);
        const temperature = hyper.entropyWeight / item.nextState.n;
        bootstrap = this.policy.targetQ(item.nextState, nextAction) - temperature * logp;
      }
      targets[i] = item.reward + hyper.gamma * bootstrap;
    }

    // Critic regression on both heads, one transition at a time.
    this.criticOpt.zeroGrad();
    this.actorOpt.zeroGrad();
    let criticLoss = 0;
    for (let i = 0; i < n; i++) {
      const item = batch[i];
      const target = constant([targets[i]], 1, 1);
      const [q1, q2] = this.policy.criticPair(item.state, item.action);
      const err = scale(add(square(sub(q1, target)), square(sub(q2, target))), 1 / (2 * n));
      err.backward();
      criticLoss += err.item();
    }
    this.criticOpt.step();

    // Actor scoring pass: sample an action and a baseline action per
    // state and value both on one shared encoding, tape-free.
    const actions: Float64Array[] = [];
    const qValues = new Float64Array(n);
    const advantages = new Float64Array(n);
    for (let i = 0; i < n; i++) {
      const view = this.policy.detachedEval(batch[i].state);
      const action = sampleDirichlet(view.conc, this.rng);
      const reference = sampleDirichlet(view.conc, this.rng);
      actions.push(action);
      qValues[i] = view.minQ(action);
      advantages[i] = qValues[i] - view.minQ(reference);
    }
    // Unit-scale the advantages so the actor/entropy balance is independent
    // of the critic's value scale; clip to bound per-sample influence.
    let rms = 0;
    for (let i = 0; i < n; i++) rms += advantages[i] * advantages[i];
    rms = Math.sqrt(rms / n) + 1e-8;
    for (let i = 0; i < n; i++) {
      advantages[i] = Math.max(-3, Math.min(3, advantages[i] / rms));
    }

    // Actor gradient pass: score function with the per-state baseline,
    // entropy bonus.
    this.criticOpt.zeroGrad();
    this.actorOpt.zeroGrad();
    let actorLoss = 0;
    let meanEntropy = 0;
    for (let i = 0; i < n; i++) {
      const conc = this.policy.concentrations(batch[i].state);
      const score = dirichletLogProbOp(conc, actions[i]);
      const entropy = dirichletEntropyOp(conc);
      meanEntropy += entropy.item() / n;
      const temperature = hyper.entropyWeight / batch[i].state.n;
      const term = scale(
        sub(scale(score, -advantages[i]), scale(entropy, temperature)),
        1 / n,
      );
      term.backward();
      actorLoss += term.item();
    }
    this.actorOpt.step();

    this.policy.updateTargets(hyper.tau);

    let meanQ = 0;
    for (let i = 0; i < n; i++) meanQ += qValues[i] / n;
    return { criticLoss, actorLoss, meanQ, meanEntropy };
  }
}
