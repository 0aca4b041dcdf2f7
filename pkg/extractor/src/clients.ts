/**
 * Client interfaces for the two models the extractor talks to, plus the
 * name-based registry the CLI resolves `--encoder` / `--lmm` through.
 *
 * Only the deterministic stubs ship with the package; real backends (a
 * local CLIP-family checkpoint, a hosted multimodal API) are deployment
 * configuration that implements these same interfaces.
 */

import { StubJointEncoder, StubLmm } from "./stubs.js";

/** A paired image/text encoder mapping both modalities into one space. */
export interface JointEncoder {
  readonly name: string;
  /** Output dimensionality; fixed per encoder choice. */
  readonly dimension: number;
  encodeImage(imageBytes: Uint8Array): Float32Array;
  encodeText(text: string): Float32Array;
}

/** A multimodal description model: image plus prompt in, raw text out. */
export interface LmmClient {
  readonly name: string;
  describe(imageBytes: Uint8Array, prompt: string): string;
}

export class UnknownModelError extends Error {}

const ENCODERS: Record<string, () => JointEncoder> = {
  stub: () => new StubJointEncoder(),
};

const LMMS: Record<string, () => LmmClient> = {
  stub: () => new StubLmm(),
};

function lookup<T>(table: Record<string, () => T>, kind: string, name: string): T {
  const make = table[name];
  if (!make) {
    const known = Object.keys(table).sort().join(", ");
    throw new UnknownModelError(
      `unknown ${kind} ${JSON.stringify(name)} (bundled: ${known}; real backends are wired in as configuration)`,
    );
  }
  return make();
}

export function resolveEncoder(name: string): JointEncoder {
  return lookup(ENCODERS, "encoder", name);
}

export function resolveLmm(name: string): LmmClient {
  return lookup(LMMS, "lmm", name);
}
