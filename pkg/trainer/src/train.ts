/**
 * Episode-driven training loop.
 *
 * Each episode rolls the simulator once with actions sampled from the
 * current policy, finalizes delayed transitions as reward windows close,
 * and then runs a block of SAC updates from replay. All randomness derives
 * from the run seed, so two runs with the same configuration produce
 * identical checkpoints and reward logs.
 */

import { writeFile } from 'node:fs/promises';

import { sampleDirichlet } from './dirichlet.js';
import type { EnvConfig } from './env.js';
import { runEpisode } from './env.js';
import type { Checkpoint, PolicyHyper } from './policy.js';
import { GuidancePolicy } from './policy.js';
import { DelayedTransitionLog, ReplayBuffer } from './replay.js';
import { computeReward } from './reward.js';
import { Rng } from './rng.js';
import { SacUpdater } from './sac.js';

/** Loop knobs that are not part of the policy hyperparameters. */
export interface TrainOptions {
  batchSize?: number;
  replayCapacity?: number;
  /** Gradient steps after each episode (once replay can fill a batch). */
  updatesPerEpisode?: number;
  /** Write the latest checkpoint here every `checkpointEvery` episodes. */
  checkpointPath?: string;
  checkpointEvery?: number;
  /** Moving-average window for the reward log. */
  logWindow?: number;
  /** Log sink; defaults to stderr. */
  log?: (line: string) => void;
}

export interface TrainResult {
  checkpoint: Checkpoint;
  /** Shaped reward summed over each episode's reward-bearing steps. */
  episodeRewards: number[];
  /** Simulator throughput of each episode (all simulated steps). */
  episodeThroughput: number[];
  movingAverages: number[];
}

/** Runs SAC for `episodes` episodes and returns the final checkpoint. */
export async function train(
  env: EnvConfig,
  hyper: PolicyHyper,
  episodes: number,
  opts: TrainOptions = {},
): Promise<TrainResult> {
  const batchSize = opts.batchSize ?? 16;
  const updatesPerEpisode = opts.updatesPerEpisode ?? 8;
  const logWindow = opts.logWindow ?? 50;
  const checkpointEvery = opts.checkpointEvery ?? 50;
  const log = opts.log ?? ((line: string) => process.stderr.write(line + '\n'));

  const policy = new GuidancePolicy(hyper, env.seed);
  const updater = new SacUpdater(policy, new Rng(env.seed + 1000003));
  const replay = new ReplayBuffer(opts.replayCapacity ?? 3000);
  const sampleRng = new Rng(env.seed + 2000003);

  const episodeRewards: number[] = [];
  const episodeThroughput: number[] = [];
  const movingAverages: number[] = [];

  for (let ep = 0; ep < episodes; ep++) {
    const actRng = new Rng(env.seed + 3000017 + ep);
    const pending = new DelayedTransitionLog();
    let episodeReward = 0;
    const result = await runEpisode(
      { ...env, seed: env.seed + ep },
      (graph) => {
        const conc = policy.inferConcentrations(graph);
        const action = sampleDirichlet(conc, actRng);
        pending.record(graph, action);
        return action;
      },
      (block) => {
        const reward = computeReward(
          {
            length: env.window,
            completions: block.completions,
            activeDelays: block.active.map(([, steps]) => steps),
          },
          hyper.c1,
          hyper.c2,
          hyper.phi,
        );
        episodeReward += reward;
        const transition = pending.close(block.rewardT, reward, block.rewardT === env.horizon - 1);
        if (transition !== null) replay.push(transition);
      },
    );

    let stats = { criticLoss: NaN, actorLoss: NaN, meanQ: NaN, meanEntropy: NaN };
    if (replay.size >= batchSize) {
      for (let u = 0; u < updatesPerEpisode; u++) {
        stats = updater.update(replay.sample(batchSize, sampleRng));
      }
    }
    policy.episodesTrained += 1;

    episodeRewards.push(episodeReward);
    episodeThroughput.push(result.throughput);
    const tail = episodeRewards.slice(-logWindow);
    const avg = tail.reduce((a, b) => a + b, 0) / tail.length;
    movingAverages.push(avg);
    log(
      JSON.stringify({
        episode: ep,
        reward: round4(episodeReward),
        rewardAvg: round4(avg),
        throughput: episodeThroughput[ep],
        replaySize: replay.size,
        criticLoss: round4(stats.criticLoss),
        actorLoss: round4(stats.actorLoss),
        entropy: round4(stats.meanEntropy),
      }),
    );
    if (opts.checkpointPath && (ep + 1) % checkpointEvery === 0) {
      await writeFile(opts.checkpointPath, JSON.stringify(policy.toCheckpoint()));
    }
  }

  const checkpoint = policy.toCheckpoint();
  if (opts.checkpointPath) {
    await writeFile(opts.checkpointPath, JSON.stringify(checkpoint));
  }
  return { checkpoint, episodeRewards, episodeThroughput, movingAverages };
}

function round4(value: number): number {
  return Number.isFinite(value) ? Math.round(value * 1e4) / 1e4 : value;
}
