/**
 * Newline-delimited JSON framing for the guidance wire protocol.
 *
 * Both sides of the protocol (the serving responder and the training env
 * driver) exchange one JSON document per line over byte streams.
 */

import { createInterface } from 'node:readline';
import type { Readable, Writable } from 'node:stream';

/** Serializes one payload as a single NDJSON line. */
export function writeJSONLine(stream: Writable, payload: unknown): void {
  stream.write(JSON.stringify(payload) + '\n');
}

/**
 * Yields parsed JSON values line by line. Lines that fail to parse yield
 * `undefined` so callers can apply their own malformed-message policy
 * (error reply when serving, protocol error when training).
 */
export async function* readJSONLines(stream: Readable): AsyncGenerator<unknown> {
  const rl = createInterface({ input: stream, crlfDelay: Infinity });
  for await (const line of rl) {
    if (line.trim() === '') continue;
    let value: unknown;
    try {
      value = JSON.parse(line);
    } catch {
      yield undefined;
      continue;
    }
    yield value;
  }
}
