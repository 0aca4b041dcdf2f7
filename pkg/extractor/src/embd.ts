/**
 * EMBD v1: the binary dataset container the training engine consumes.
 *
 * Layout, little-endian throughout:
 *
 *   header   "EMBD" | u16 version=1 | u32 dimension | u32 numClasses
 *            | u64 recordCount | u32 crc32 of the payload
 *   payload  class table: numClasses x (u16 nameLen | utf8 name)
 *            records: recordCount x (u16 idLen | utf8 id | u32 label
 *                     | u8 textCount | f32[dimension] image
 *                     | textCount x f32[dimension] texts)
 *
 * Vectors are stored as f32. The reader is strict: wrong magic, wrong
 * version, truncation, checksum mismatch and trailing bytes are all
 * distinct errors, and the decoded dataset is re-validated before it is
 * returned.
 */

import { crc32 } from "node:zlib";

export const EMBD_MAGIC = "EMBD";
export const EMBD_VERSION = 1;
export const HEADER_SIZE = 26;
export const MAX_TEXT_EMBEDDINGS = 255;

export interface EmbdRecord {
  sampleId: string;
  label: number;
  image: Float32Array;
  texts: Float32Array[];
}

export interface EmbdDataset {
  dimension: number;
  classNames: string[];
  records: EmbdRecord[];
}

export class EmbdFormatError extends Error {}
export class EmbdValidationError extends Error {}

/** Structural and semantic checks shared by the writer and the reader. */
export function validateDataset(ds: EmbdDataset): void {
  if (!Number.isInteger(ds.dimension) || ds.dimension < 1) {
    throw new EmbdValidationError(`dimension must be a positive integer, got ${ds.dimension}`);
  }
  if (ds.classNames.length < 1) {
    throw new EmbdValidationError("class table is empty");
  }
  const seenNames = new Set<string>();
  for (const name of ds.classNames) {
    if (name.length === 0) {
      throw new EmbdValidationError("class names must be non-empty");
    }
    if (seenNames.has(name)) {
      throw new EmbdValidationError(`duplicate class name ${JSON.stringify(name)}`);
    }
    seenNames.add(name);
  }
  const seenIds = new Set<string>();
  for (const rec of ds.records) {
    if (rec.sampleId.length === 0) {
      throw new EmbdValidationError("sample ids must be non-empty");
    }
    if (seenIds.has(rec.sampleId)) {
      throw new EmbdValidationError(`duplicate sample id ${JSON.stringify(rec.sampleId)}`);
    }
    seenIds.add(rec.sampleId);
    if (!Number.isInteger(rec.label) || rec.label < 0 || rec.label >= ds.classNames.length) {
      throw new EmbdValidationError(
        `label ${rec.label} of ${JSON.stringify(rec.sampleId)} is outside 0..${ds.classNames.length - 1}`,
      );
    }
    if (rec.image.length !== ds.dimension) {
      throw new EmbdValidationError(
        `image vector of ${JSON.stringify(rec.sampleId)} has length ${rec.image.length}, expected ${ds.dimension}`,
      );
    }
    if (rec.texts.length > MAX_TEXT_EMBEDDINGS) {
      throw new EmbdValidationError(
        `${JSON.stringify(rec.sampleId)} carries ${rec.texts.length} text embeddings, limit is ${MAX_TEXT_EMBEDDINGS}`,
      );
    }
    for (const t of rec.texts) {
      if (t.length !== ds.dimension) {
        throw new EmbdValidationError(
          `text vector of ${JSON.stringify(rec.sampleId)} has length ${t.length}, expected ${ds.dimension}`,
        );
      }
    }
  }
}

function utf8WithLength(text: string, what: string): Buffer {
  const bytes = Buffer.from(text, "utf8");
  if (bytes.length > 0xffff) {
    throw new EmbdValidationError(`${what} is longer than 65535 bytes`);
  }
  const out = Buffer.alloc(2 + bytes.length);
  out.writeUInt16LE(bytes.length, 0);
  bytes.copy(out, 2);
  return out;
}

function f32Bytes(vec: Float32Array): Buffer {
  const out = Buffer.alloc(vec.length * 4);
  for (let i = 0; i < vec.length; i++) {
    out.writeFloatLE(vec[i], i * 4);
  }
  return out;
}

export function writeEmbd(ds: EmbdDataset): Buffer {
  validateDataset(ds);
  const parts: Buffer[] = [];
  for (const name of ds.classNames) {
    parts.push(utf8WithLength(name, `class name ${JSON.stringify(name)}`));
  }
  for (const rec of ds.records) {
    parts.push(utf8WithLength(rec.sampleId, `sample id ${JSON.stringify(rec.sampleId)}`));
    const fixed = Buffer.alloc(5);
    fixed.writeUInt32LE(rec.label, 0);
    fixed.writeUInt8(rec.texts.length, 4);
    parts.push(fixed);
    parts.push(f32Bytes(rec.image));
    for (const t of rec.texts) {
      parts.push(f32Bytes(t));
    }
  }
  const payload = Buffer.concat(parts);

  const header = Buffer.alloc(HEADER_SIZE);
  header.write(EMBD_MAGIC, 0, "ascii");
  header.writeUInt16LE(EMBD_VERSION, 4);
  header.writeUInt32LE(ds.dimension, 6);
  header.writeUInt32LE(ds.classNames.length, 10);
  header.writeBigUInt64LE(BigInt(ds.records.length), 14);
  header.writeUInt32LE(crc32(payload), 22);
  return Buffer.concat([header, payload]);
}

class Cursor {
  private offset = 0;

  constructor(private readonly buf: Buffer) {}

  private need(n: number, what: string): number {
    if (this.offset + n > this.buf.length) {
      throw new EmbdFormatError(
        `truncated while reading ${what} at offset ${this.offset} (need ${n} bytes, have ${this.buf.length - this.offset})`,
      );
    }
    const at = this.offset;
    this.offset += n;
    return at;
  }

  u8(what: string): number {
    return this.buf.readUInt8(this.need(1, what));
  }

  u16(what: string): number {
    return this.buf.readUInt16LE(this.need(2, what));
  }

  u32(what: string): number {
    return this.buf.readUInt32LE(this.need(4, what));
  }

  u64(what: string): number {
    const big = this.buf.readBigUInt64LE(this.need(8, what));
    if (big > BigInt(Number.MAX_SAFE_INTEGER)) {
      throw new EmbdFormatError(`${what} ${big} is implausibly large`);
    }
    return Number(big);
  }

  utf8(what: string): string {
    const len = this.u16(`${what} length`);
    const at = this.need(len, what);
    return this.buf.subarray(at, at + len).toString("utf8");
  }

  f32Vector(dim: number, what: string): Float32Array {
    const at = this.need(dim * 4, what);
    const out = new Float32Array(dim);
    for (let i = 0; i < dim; i++) {
      out[i] = this.buf.readFloatLE(at + i * 4);
    }
    return out;
  }

  get exhausted(): boolean {
    return this.offset === this.buf.length;
  }

  get position(): number {
    return this.offset;
  }
}

export function readEmbd(buf: Buffer): EmbdDataset {
  if (buf.length < HEADER_SIZE) {
    throw new EmbdFormatError(`file is ${buf.length} bytes, smaller than the ${HEADER_SIZE}-byte header`);
  }
  const magic = buf.subarray(0, 4).toString("ascii");
  if (magic !== EMBD_MAGIC) {
    throw new EmbdFormatError(`bad magic ${JSON.stringify(magic)}, expected ${JSON.stringify(EMBD_MAGIC)}`);
  }
  const version = buf.readUInt16LE(4);
  if (version !== EMBD_VERSION) {
    throw new EmbdFormatError(`unsupported version ${version}, expected ${EMBD_VERSION}`);
  }
  const dimension = buf.readUInt32LE(6);
  const numClasses = buf.readUInt32LE(10);
  const recordCountBig = buf.readBigUInt64LE(14);
  const declaredCrc = buf.readUInt32LE(22);

  const payload = buf.subarray(HEADER_SIZE);
  const actualCrc = crc32(payload);
  if (actualCrc !== declaredCrc) {
    throw new EmbdFormatError(
      `crc32 mismatch: header declares ${declaredCrc}, payload hashes to ${actualCrc}`,
    );
  }
  if (recordCountBig > BigInt(Number.MAX_SAFE_INTEGER)) {
    throw new EmbdFormatError(`record count ${recordCountBig} is implausibly large`);
  }
  const recordCount = Number(recordCountBig);

  const cur = new Cursor(payload);
  const classNames: string[] = [];
  for (let i = 0; i < numClasses; i++) {
    classNames.push(cur.utf8(`class name ${i}`));
  }
  const records: EmbdRecord[] = [];
  for (let i = 0; i < recordCount; i++) {
    const sampleId = cur.utf8(`record ${i} id`);
    const label = cur.u32(`record ${i} label`);
    const textCount = cur.u8(`record ${i} text count`);
    const image = cur.f32Vector(dimension, `record ${i} image vector`);
    const texts: Float32Array[] = [];
    for (let j = 0; j < textCount; j++) {
      texts.push(cur.f32Vector(dimension, `record ${i} text vector ${j}`));
    }
    records.push({ sampleId, label, image, texts });
  }
  if (!cur.exhausted) {
    throw new EmbdFormatError(`trailing bytes after the last record at offset ${HEADER_SIZE + cur.position}`);
  }

  const ds: EmbdDataset = { dimension, classNames, records };
  try {
    validateDataset(ds);
  } catch (err) {
    if (err instanceof EmbdValidationError) {
      throw new EmbdFormatError(`decoded dataset is invalid: ${err.message}`);
    }
    throw err;
  }
  return ds;
}
