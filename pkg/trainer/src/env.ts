/**
 * Training environment: the fleet simulator driven over its guidance wire
 * protocol in training mode.
 *
 * One episode spawns one simulator run. The simulator sends a guidance
 * request per step and appends reward ingredients for step t - W once that
 * window closes, so an episode of `horizon` reward-bearing steps runs the
 * simulator for `horizon + window` steps: the tail exists purely to close
 * the last windows. Metrics land in a JSON file the driver reads back.
 */

import { spawn } from 'node:child_process';
import { mkdtemp, readFile, rm } from 'node:fs/promises';
import { tmpdir } from 'node:os';
import { join } from 'node:path';

import type { FeatureGraph, RewardBlock } from './graph.js';
import { ProtocolError, parseGuidanceRequest, parseRewardBlock } from './graph.js';
import { readJSONLines, writeJSONLine } from './protocol.js';

/** Raised when the simulator emits a message the driver cannot parse. */
export class EnvProtocolError extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'EnvProtocolError';
  }
}

/** One training environment configuration. */
export interface EnvConfig {
  /** Bundled map name or map file path. */
  map: string;
  agents: number;
  tasks: number;
  /** Reward-bearing steps per episode. */
  horizon: number;
  /** Progress-window length W (the simulator's training window). */
  window: number;
  seed: number;
  /** Command prefix launching the simulator CLI. */
  engineCmd?: string[];
  /** Simulator-side reply deadline, seconds. */
  deadline?: number;
}

export const DEFAULT_ENGINE_CMD = ['python3', '-m', 'fleetflow.cli'];

/** Per-step simulator metrics echoed back after an episode. */
export interface EngineStepMetrics {
  t: number;
  completions: number;
  [key: string]: unknown;
}

/** Outcome of one finished episode. */
export interface EpisodeResult {
  /** Reward blocks in arrival order, one per step in [0, horizon). */
  rewards: RewardBlock[];
  /** Guidance requests answered (horizon + window). */
  steps: number;
  /** Parsed simulator metrics document. */
  metrics: Record<string, unknown>;
  /** Tasks completed over the whole simulated run. */
  throughput: number;
  /** Requests the simulator answered with its internal fallback. */
  fallbacks: number;
  /** Completions per simulator step, from the metrics document. */
  stepCompletions: number[];
}

/** Builds the simulator argv for one training episode. */
export function buildEngineArgs(cfg: EnvConfig, outPath: string): string[] {
  return [
    'run',
    '--map', cfg.map,
    '--agents', String(cfg.agents),
    '--tasks', String(cfg.tasks),
    '--horizon', String(cfg.horizon + cfg.window),
    '--scheduler', 'flow',
    '--external-stdio',
    '--train-mode',
    '--train-window', String(cfg.window),
    '--seed', String(cfg.seed),
    '--deadline', String(cfg.deadline ?? 10),
    '--record-steps',
    '--out', outPath,
  ];
}

/**
 * Runs one episode, answering every request through `onRequest` and
 * reporting each closed reward window through `onReward`.
 */
export async function runEpisode(
  cfg: EnvConfig,
  onRequest: (graph: FeatureGraph) => ArrayLike<number>,
  onReward?: (block: RewardBlock) => void,
): Promise<EpisodeResult> {
  const workDir = await mkdtemp(join(tmpdir(), 'guidance-episode-'));
  const outPath = join(workDir, 'metrics.json');
  const cmd = cfg.engineCmd ?? DEFAULT_ENGINE_CMD;
  const child = spawn(cmd[0], [...cmd.slice(1), ...buildEngineArgs(cfg, outPath)], {
    stdio: ['pipe', 'pipe', 'pipe'],
  });
  let stderrTail = '';
  child.stderr.setEncoding('utf8');
  child.stderr.on('data', (chunk: string) => {
    stderrTail = (stderrTail + chunk).slice(-4096);
  });
  // A simulator crash mid-episode surfaces as the exit-code check below,
  // not as an EPIPE from the last reply write.
  child.stdin.on('error', () => {});
  const exited = new Promise<number>((resolve, reject) => {
    child.on('error', reject);
    child.on('close', (code) => resolve(code ?? -1));
  });

  const rewards: RewardBlock[] = [];
  let steps = 0;
  try {
    for await (const message of readJSONLines(child.stdout)) {
      if (message === undefined) {
        throw new EnvProtocolError('simulator sent an unparseable line');
      }
      let graph: FeatureGraph;
      let block: RewardBlock | null;
      try {
        graph = parseGuidanceRequest(message);
        block = parseRewardBlock(message);
      } catch (err) {
        if (err instanceof ProtocolError) {
          throw new EnvProtocolError(`bad simulator message: ${err.message}`);
        }
        throw err;
      }
      if (block !== null) {
        rewards.push(block);
        onReward?.(block);
      }
      const probs = onRequest(graph);
      writeJSONLine(child.stdin, { probs: Array.from(probs) });
      steps += 1;
    }
    child.stdin.end();
    const code = await exited;
    if (code !== 0) {
      throw new Error(`simulator exited with code ${code}: ${stderrTail.trim()}`);
    }
    const metrics = JSON.parse(await readFile(outPath, 'utf8')) as Record<string, unknown>;
    const summary = (metrics.metrics ?? {}) as Record<string, unknown>;
    const perStep = (metrics.per_step ?? []) as EngineStepMetrics[];
    const stepCompletions = perStep.map((row) => row.completions);
    return {
      rewards,
      steps,
      metrics,
      throughput: Number(summary.throughput ?? NaN),
      fallbacks: Number(summary.guidance_fallbacks ?? NaN),
      stepCompletions,
    };
  } finally {
    child.kill();
    await rm(workDir, { recursive: true, force: true });
  }
}
