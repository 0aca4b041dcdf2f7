#!/usr/bin/env node
/**
 * Command line entry point.
 *
 *   extractor extract --images DIR --labels CSV --encoder NAME
 *                     --lmm NAME --out FILE
 *
 * Exit codes match the training engine's CLI: 1 for usage errors, 2 for
 * data/configuration errors.
 */

import { parseArgs } from "node:util";

import { resolveEncoder, resolveLmm, UnknownModelError } from "./clients.js";
import { extract, ExtractError } from "./extract.js";
import { EmbdValidationError } from "./embd.js";

const USAGE =
  "usage: extractor extract --images DIR --labels CSV --encoder NAME --lmm NAME --out FILE";

function usageError(message: string): never {
  console.error(USAGE);
  console.error(`error: ${message}`);
  process.exit(1);
}

function dataError(message: string): never {
  console.error(`error: ${message}`);
  process.exit(2);
}

export function main(argv: string[]): void {
  if (argv.length === 0) {
    usageError("a subcommand is required");
  }
  if (argv[0] !== "extract") {
    usageError(`unknown subcommand ${JSON.stringify(argv[0])}`);
  }

  let values;
  try {
    ({ values } = parseArgs({
      args: argv.slice(1),
      options: {
        images: { type: "string" },
        labels: { type: "string" },
        encoder: { type: "string" },
        lmm: { type: "string" },
        out: { type: "string" },
      },
      allowPositionals: false,
    }));
  } catch (err) {
    usageError(err instanceof Error ? err.message : String(err));
  }
  for (const flag of ["images", "labels", "encoder", "lmm", "out"] as const) {
    if (values[flag] === undefined) {
      usageError(`--${flag} is required`);
    }
  }

  try {
    const summary = extract({
      imagesDir: values.images!,
      labelsFile: values.labels!,
      encoder: resolveEncoder(values.encoder!),
      lmm: resolveLmm(values.lmm!),
      outPath: values.out!,
    });
    const skipped =
      summary.skippedUnreadable + summary.excludedNoDescriptions > 0
        ? ` (skipped ${summary.skippedUnreadable} unreadable, excluded ${summary.excludedNoDescriptions} without descriptions)`
        : "";
    console.log(
      `wrote ${summary.outPath}: ${summary.written} records, ` +
        `${summary.classNames.length} classes, dimension ${summary.dimension}${skipped}`,
    );
  } catch (err) {
    if (
      err instanceof UnknownModelError ||
      err instanceof ExtractError ||
      err instanceof EmbdValidationError ||
      (err instanceof Error && "code" in err) // fs errors: ENOENT, EACCES, ...
    ) {
      dataError(err.message);
    }
    throw err;
  }
}

main(process.argv.slice(2));
