/**
 * Long-running guidance responder.
 *
 * Answers each protocol request with the Dirichlet mean a / sum(a) of the
 * policy's concentration output: inference is deterministic and stays well
 * under the 200 ms reply budget at |V_agg| <= 200 on a CPU. Malformed
 * requests get an error reply on the same line protocol; the responder
 * itself never crashes on bad input.
 */

import { createServer, type Server } from 'node:net';
import type { Readable, Writable } from 'node:stream';

import { dirichletMean } from './dirichlet.js';
import { ProtocolError, parseGuidanceRequest } from './graph.js';
import type { GuidancePolicy } from './policy.js';
import { readJSONLines, writeJSONLine } from './protocol.js';

export type GuidanceReply = { probs: number[] } | { error: string };

/** Computes the reply for one already-parsed JSON message. */
export function answerRequest(policy: GuidancePolicy, message: unknown): GuidanceReply {
  try {
    const graph = parseGuidanceRequest(message);
    const conc = policy.inferConcentrations(graph);
    return { probs: Array.from(dirichletMean(conc)) };
  } catch (err) {
    if (err instanceof ProtocolError) return { error: err.message };
    return { error: `internal error: ${(err as Error).message}` };
  }
}

/** Serves NDJSON requests from input to output until input ends. */
export async function serveStream(
  policy: GuidancePolicy,
  input: Readable,
  output: Writable,
): Promise<void> {
  for await (const message of readJSONLines(input)) {
    const reply =
      message === undefined
        ? { error: 'request is not valid JSON' }
        : answerRequest(policy, message);
    writeJSONLine(output, reply);
  }
}

/**
 * Serves the protocol on a TCP port (the simulator's host:port transport).
 * Connections are handled one request at a time.
 */
export function serveTcp(policy: GuidancePolicy, port: number, host = '127.0.0.1'): Server {
  const server = createServer((socket) => {
    serveStream(policy, socket, socket).catch(() => socket.destroy());
  });
  server.listen(port, host);
  return server;
}
