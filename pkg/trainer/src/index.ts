/**
 * Public API surface.
 */

export {
  dirichletEntropy,
  dirichletLogPdf,
  dirichletMean,
  sampleDirichlet,
  sampleGamma,
} from './dirichlet.js';
export {
  DEFAULT_ENGINE_CMD,
  EnvProtocolError,
  buildEngineArgs,
  runEpisode,
  type EnvConfig,
  type EpisodeResult,
} from './env.js';
export {
  NODE_FEATURES,
  ProtocolError,
  SIMPLEX_TOLERANCE,
  isSimplex,
  parseGuidanceRequest,
  parseRewardBlock,
  type FeatureGraph,
  type RewardBlock,
} from './graph.js';
export { digamma, lgamma, softplus, trigamma } from './numerics.js';
export {
  DEFAULT_HYPER,
  GuidancePolicy,
  type Checkpoint,
  type PolicyHyper,
} from './policy.js';
export { readJSONLines, writeJSONLine } from './protocol.js';
export { DelayedTransitionLog, ReplayBuffer, type DelayedTransition } from './replay.js';
export { WindowTooShort, computeReward, makePhi, type PhiSpec, type TraceWindow } from './reward.js';
export { Rng } from './rng.js';
export { SacUpdater, type SacStats } from './sac.js';
export { answerRequest, serveStream, serveTcp, type GuidanceReply } from './serve.js';
export { train, type TrainOptions, type TrainResult } from './train.js';
