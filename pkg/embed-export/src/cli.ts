#!/usr/bin/env node
/**
 * embed-export --input titles.jsonl --output vectors.txt
 *              [--model NAME] [--batch-size N]
 *
 * Reads line-delimited JSON {id, title}, encodes the titles, writes the
 * embedding file, and prints the export manifest as JSON on stdout.
 * Exits 1 on any failure with a diagnostic on stderr.
 */

import { parseArgs } from "node:util";

import { DEFAULT_MODEL } from "./encoder.js";
import { exportEmbeddings } from "./lib.js";

const USAGE =
  "usage: embed-export --input <titles.jsonl> --output <vectors.txt> " +
  `[--model <name|hash:dim>] [--batch-size <n>]\n` +
  `default model: ${DEFAULT_MODEL}`;

async function main(): Promise<number> {
  let values: {
    input?: string;
    output?: string;
    model?: string;
    "batch-size"?: string;
    help?: boolean;
  };
  try {
    ({ values } = parseArgs({
      options: {
        input: { type: "string" },
        output: { type: "string" },
        model: { type: "string", default: DEFAULT_MODEL },
        "batch-size": { type: "string", default: "32" },
        help: { type: "boolean", default: false },
      },
    }));
  } catch (err) {
    console.error(USAGE);
    console.error(`error: ${err instanceof Error ? err.message : String(err)}`);
    return 1;
  }
  if (values.help) {
    console.log(USAGE);
    return 0;
  }
  if (!values.input || !values.output) {
    console.error(USAGE);
    console.error("error: --input and --output are required");
    return 1;
  }
  const batchRaw = values["batch-size"] as string;
  if (!/^\d+$/.test(batchRaw) || Number(batchRaw) < 1) {
    console.error(`error: bad --batch-size '${batchRaw}'`);
    return 1;
  }
  try {
    const manifest = await exportEmbeddings({
      input: values.input,
      output: values.output,
      model: values.model,
      batchSize: Number(batchRaw),
    });
    console.log(JSON.stringify(manifest));
    return 0;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : String(err)}`);
    return 1;
  }
}

main().then((code) => {
  process.exitCode = code;
});
