/**
 * The extraction pipeline: labeled images in, one EMBD dataset out.
 *
 * For every row of the labels CSV the pipeline reads the image, embeds
 * it with the chosen encoder, asks the description model for ten
 * semantic descriptions, parses the reply, and embeds each description
 * with the same encoder's text side. Images that cannot be read are
 * skipped with a warning; images whose reply yields zero parseable
 * descriptions are excluded with a warning; both leave the run going.
 * Vectors are written unnormalized.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import type { JointEncoder, LmmClient } from "./clients.js";
import { EmbdRecord, writeEmbd } from "./embd.js";
import { parseDescriptions } from "./parse.js";

export const DESCRIPTION_PROMPT = "Give 10 semantic descriptions for the image";
export const EXPECTED_DESCRIPTIONS = 10;

export class ExtractError extends Error {}

export interface LabelRow {
  fileName: string;
  className: string;
}

export interface ExtractOptions {
  imagesDir: string;
  labelsFile: string;
  encoder: JointEncoder;
  lmm: LmmClient;
  outPath: string;
  /** Warning sink; defaults to stderr. */
  log?: (message: string) => void;
}

export interface ExtractSummary {
  outPath: string;
  dimension: number;
  classNames: string[];
  written: number;
  skippedUnreadable: number;
  excludedNoDescriptions: number;
}

/**
 * Reads a `filename,classname` CSV. A first line spelled exactly
 * `filename,label` (any case) is treated as a header. Blank lines and
 * `#` comment lines are ignored; duplicate filenames are an error.
 */
export function readLabelsCsv(labelsFile: string): LabelRow[] {
  const text = fs.readFileSync(labelsFile, "utf8");
  const rows: LabelRow[] = [];
  const seen = new Set<string>();
  const lines = text.split(/\r?\n/);
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (line === "" || line.startsWith("#")) {
      continue;
    }
    if (rows.length === 0 && seen.size === 0 && line.toLowerCase() === "filename,label") {
      continue;
    }
    const comma = line.indexOf(",");
    if (comma <= 0 || comma === line.length - 1) {
      throw new ExtractError(`${labelsFile}:${i + 1}: expected "filename,classname", got ${JSON.stringify(line)}`);
    }
    const fileName = line.slice(0, comma).trim();
    const className = line.slice(comma + 1).trim();
    if (fileName === "" || className === "") {
      throw new ExtractError(`${labelsFile}:${i + 1}: empty filename or class name`);
    }
    if (seen.has(fileName)) {
      throw new ExtractError(`${labelsFile}:${i + 1}: duplicate filename ${JSON.stringify(fileName)}`);
    }
    seen.add(fileName);
    rows.push({ fileName, className });
  }
  if (rows.length === 0) {
    throw new ExtractError(`${labelsFile}: no label rows`);
  }
  return rows;
}

function readImage(filePath: string): Buffer | string {
  try {
    const bytes = fs.readFileSync(filePath);
    if (bytes.length === 0) {
      return "file is empty";
    }
    return bytes;
  } catch (err) {
    return err instanceof Error ? err.message : String(err);
  }
}

export function extract(opts: ExtractOptions): ExtractSummary {
  const log = opts.log ?? ((message: string) => console.error(message));
  const rows = readLabelsCsv(opts.labelsFile);
  const classNames = [...new Set(rows.map((r) => r.className))].sort();
  const labelOf = new Map(classNames.map((name, index) => [name, index]));

  const records: EmbdRecord[] = [];
  let skippedUnreadable = 0;
  let excludedNoDescriptions = 0;
  for (const row of rows) {
    const image = readImage(path.join(opts.imagesDir, row.fileName));
    if (typeof image === "string") {
      log(`warning: skipped unreadable image ${row.fileName}: ${image}`);
      skippedUnreadable += 1;
      continue;
    }
    const reply = opts.lmm.describe(image, DESCRIPTION_PROMPT);
    const descriptions = parseDescriptions(reply);
    if (descriptions.length === 0) {
      log(`warning: excluded ${row.fileName}: reply contained no parseable descriptions`);
      excludedNoDescriptions += 1;
      continue;
    }
    if (descriptions.length < EXPECTED_DESCRIPTIONS) {
      log(
        `warning: ${row.fileName}: expected ${EXPECTED_DESCRIPTIONS} descriptions, parsed ${descriptions.length}`,
      );
    }
    records.push({
      sampleId: row.fileName,
      label: labelOf.get(row.className)!,
      image: opts.encoder.encodeImage(image),
      texts: descriptions.map((d) => opts.encoder.encodeText(d)),
    });
  }

  if (records.length === 0) {
    throw new ExtractError("every image was skipped or excluded; nothing to write");
  }
  const populated = new Set(records.map((r) => r.label));
  for (const [name, label] of labelOf) {
    if (!populated.has(label)) {
      log(`warning: class ${JSON.stringify(name)} ended up with no records; centroid computation will reject this file`);
    }
  }

  const bytes = writeEmbd({ dimension: opts.encoder.dimension, classNames, records });
  const tmpPath = `${opts.outPath}.tmp-${process.pid}`;
  fs.writeFileSync(tmpPath, bytes);
  fs.renameSync(tmpPath, opts.outPath);

  return {
    outPath: opts.outPath,
    dimension: opts.encoder.dimension,
    classNames,
    written: records.length,
    skippedUnreadable,
    excludedNoDescriptions,
  };
}
