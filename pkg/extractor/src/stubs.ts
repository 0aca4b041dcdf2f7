/**
 * Deterministic stand-ins for the encoder pair and the description model.
 *
 * Real deployments plug a CLIP-family encoder and a hosted or local
 * multimodal model in behind the same interfaces; these stubs exist so
 * the pipeline can be exercised end to end with zero model downloads and
 * bit-reproducible output.
 *
 * The two stub encoders share one pseudo-random vector family keyed by a
 * content hash: the image encoder embeds an image at the vector for its
 * byte hash, the description stub mentions that hash as an `img-XXXXXXXX`
 * token, and the text encoder gives such tokens a dominant weight at the
 * same vector. An image and the descriptions written about it therefore
 * land near each other in embedding space — the alignment a real joint
 * encoder provides, reduced to what pipeline tests need.
 */

import type { JointEncoder, LmmClient } from "./clients.js";

/** FNV-1a over raw bytes, returned as an unsigned 32-bit integer. */
export function fnv1a(bytes: Uint8Array): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < bytes.length; i++) {
    hash ^= bytes[i];
    hash = Math.imul(hash, 0x01000193);
  }
  return hash >>> 0;
}

/** mulberry32: small deterministic PRNG over a 32-bit state. */
function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/** Deterministic Gaussian vector for a 32-bit key (not normalized). */
export function keyVector(key: number, dimension: number): Float64Array {
  const next = mulberry32(key);
  const out = new Float64Array(dimension);
  for (let i = 0; i < dimension; i += 2) {
    // Box-Muller; u is kept away from 0 so log stays finite.
    const u = next() + Number.EPSILON;
    const v = next();
    const r = Math.sqrt(-2 * Math.log(u));
    out[i] = r * Math.cos(2 * Math.PI * v);
    if (i + 1 < dimension) {
      out[i + 1] = r * Math.sin(2 * Math.PI * v);
    }
  }
  return out;
}

export function imageKeyToken(imageBytes: Uint8Array): string {
  return `img-${fnv1a(imageBytes).toString(16).padStart(8, "0")}`;
}

const KEY_TOKEN = /^img-([0-9a-f]{8})$/;
const KEY_TOKEN_WEIGHT = 3.0;
const WORD_WEIGHT = 0.25;

export class StubJointEncoder implements JointEncoder {
  readonly name = "stub";

  constructor(readonly dimension: number = 64) {}

  encodeImage(imageBytes: Uint8Array): Float32Array {
    return Float32Array.from(keyVector(fnv1a(imageBytes), this.dimension));
  }

  encodeText(text: string): Float32Array {
    const acc = new Float64Array(this.dimension);
    const tokens = text.toLowerCase().match(/[a-z0-9][a-z0-9-]*/g) ?? [];
    for (const token of tokens) {
      const keyMatch = KEY_TOKEN.exec(token);
      const key = keyMatch ? parseInt(keyMatch[1], 16) : fnv1a(Buffer.from(token, "utf8"));
      const weight = keyMatch ? KEY_TOKEN_WEIGHT : WORD_WEIGHT;
      const vec = keyVector(key, this.dimension);
      for (let i = 0; i < this.dimension; i++) {
        acc[i] += weight * vec[i];
      }
    }
    return Float32Array.from(acc);
  }
}

const DESCRIPTION_TEMPLATES = [
  "a close-up photograph of subject {token} under natural light",
  "a wide shot showing subject {token} with its surroundings",
  "subject {token} seen from a low angle against a plain background",
  "a detailed view of the texture and color of subject {token}",
  "subject {token} captured in motion with slight blur",
  "an overhead view placing subject {token} at the center of the frame",
  "subject {token} partially occluded by objects in the foreground",
  "a high-contrast rendition of subject {token} at dusk",
  "subject {token} photographed alongside similar items for scale",
  "a softly lit portrait-style image of subject {token}",
];

/**
 * Canned description model: replies with a numbered ten-item list, each
 * item mentioning the image's content-hash token. Shaped like a chat
 * transcript (preamble and closing line) so the reply has to go through
 * the same parsing as real model output.
 */
export class StubLmm implements LmmClient {
  readonly name = "stub";

  describe(imageBytes: Uint8Array, prompt: string): string {
    void prompt; // the stub answers the one description prompt regardless
    const token = imageKeyToken(imageBytes);
    const lines = DESCRIPTION_TEMPLATES.map(
      (tpl, i) => `${i + 1}. ${tpl.replace("{token}", token)}`,
    );
    return `Sure! Here are 10 semantic descriptions for the image:\n\n${lines.join("\n")}\n\nI hope these help.\n`;
  }
}
