#!/usr/bin/env node
/**
 * Command-line entry points: `train` runs SAC against the simulator and
 * writes a checkpoint; `serve` answers guidance requests from a checkpoint
 * over stdio or TCP.
 */

import { readFile } from 'node:fs/promises';
import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';

import { DEFAULT_ENGINE_CMD, type EnvConfig } from './env.js';
import { DEFAULT_HYPER, GuidancePolicy, type Checkpoint, type PolicyHyper } from './policy.js';
import type { PhiSpec } from './reward.js';
import { serveStream, serveTcp } from './serve.js';
import { train } from './train.js';

function phiFromFlags(phi: string, kappa: number): PhiSpec {
  if (phi === 'inverse') return { kind: 'inverse' };
  if (phi === 'exponential') return { kind: 'exponential', kappa };
  throw new Error(`unknown phi '${phi}'`);
}

async function main(): Promise<void> {
  await yargs(hideBin(process.argv))
    .scriptName('guidance-trainer')
    .command(
      'train',
      'train a guidance policy against the simulator',
      (cmd) =>
        cmd
          .option('map', { type: 'string', default: 'open10' })
          .option('agents', { type: 'number', default: 8 })
          .option('tasks', { type: 'number', default: 12 })
          .option('horizon', { type: 'number', default: 150 })
          .option('window', { type: 'number', default: 20 })
          .option('episodes', { type: 'number', default: 300 })
          .option('seed', { type: 'number', default: 0 })
          .option('out', { type: 'string', demandOption: true, describe: 'checkpoint path' })
          .option('engine-cmd', {
            type: 'string',
            describe: 'override the simulator launch command',
          })
          .option('layers', { type: 'number', default: DEFAULT_HYPER.layers })
          .option('width', { type: 'number', default: DEFAULT_HYPER.width })
          .option('entropy-weight', { type: 'number', default: DEFAULT_HYPER.entropyWeight })
          .option('actor-lr', { type: 'number', default: DEFAULT_HYPER.actorLr })
          .option('critic-lr', { type: 'number', default: DEFAULT_HYPER.criticLr })
          .option('gamma', { type: 'number', default: DEFAULT_HYPER.gamma })
          .option('tau', { type: 'number', default: DEFAULT_HYPER.tau })
          .option('c1', { type: 'number', default: DEFAULT_HYPER.c1 })
          .option('c2', { type: 'number', default: DEFAULT_HYPER.c2 })
          .option('phi', { choices: ['inverse', 'exponential'] as const, default: 'inverse' })
          .option('kappa', { type: 'number', default: 3 })
          .option('conc-floor', { type: 'number', default: DEFAULT_HYPER.concFloor })
          .option('batch-size', { type: 'number', default: 16 })
          .option('updates-per-episode', { type: 'number', default: 8 })
          .option('replay-capacity', { type: 'number', default: 3000 })
          .option('checkpoint-every', { type: 'number', default: 50 }),
      async (argv) => {
        const env: EnvConfig = {
          map: argv.map,
          agents: argv.agents,
          tasks: argv.tasks,
          horizon: argv.horizon,
          window: argv.window,
          seed: argv.seed,
          engineCmd: argv.engineCmd ? argv.engineCmd.split(/\s+/) : DEFAULT_ENGINE_CMD,
        };
        const hyper: PolicyHyper = {
          layers: argv.layers,
          width: argv.width,
          entropyWeight: argv.entropyWeight,
          actorLr: argv.actorLr,
          criticLr: argv.criticLr,
          gamma: argv.gamma,
          tau: argv.tau,
          c1: argv.c1,
          c2: argv.c2,
          phi: phiFromFlags(argv.phi, argv.kappa),
          concFloor: argv.concFloor,
        };
        const result = await train(env, hyper, argv.episodes, {
          batchSize: argv.batchSize,
          updatesPerEpisode: argv.updatesPerEpisode,
          replayCapacity: argv.replayCapacity,
          checkpointPath: argv.out,
          checkpointEvery: argv.checkpointEvery,
        });
        const rewards = result.episodeRewards;
        const tail =
          rewards.length > 0 ? `final reward ${rewards[rewards.length - 1].toFixed(3)}` : 'initialization only';
        process.stderr.write(`trained ${rewards.length} episodes, ${tail}, checkpoint -> ${argv.out}\n`);
      },
    )
    .command(
      'serve',
      'answer guidance requests from a trained checkpoint',
      (cmd) =>
        cmd
          .option('checkpoint', { type: 'string', demandOption: true })
          .option('port', { type: 'number', describe: 'serve on TCP instead of stdio' }),
      async (argv) => {
        const doc = JSON.parse(await readFile(argv.checkpoint, 'utf8')) as Checkpoint;
        const policy = GuidancePolicy.fromCheckpoint(doc);
        if (argv.port !== undefined) {
          serveTcp(policy, argv.port);
          process.stderr.write(`serving on 127.0.0.1:${argv.port}\n`);
          return;
        }
        await serveStream(policy, process.stdin, process.stdout);
      },
    )
    .demandCommand(1)
    .strict()
    .fail((msg, err) => {
      process.stderr.write(`error: ${msg ?? err?.message}\n`);
      process.exit(1);
    })
    .parseAsync();
}

main().catch((err: Error) => {
  process.stderr.write(`runtime error: ${err.message}\n`);
  process.exit(2);
});
