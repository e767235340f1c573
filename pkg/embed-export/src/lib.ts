import { readFileSync, writeFileSync } from "node:fs";

import { DEFAULT_MODEL, loadEncoder } from "./encoder.js";
import { EmbeddingRecord, embeddingFileText, l2Normalize } from "./format.js";

export interface ExportManifest {
  model_name: string;
  dim: number;
  count: number;
  normalized: true;
  warnings: string[];
}

export interface ExportOptions {
  input: string;
  output: string;
  model?: string;
  batchSize?: number;
}

interface TitleRow {
  id: string;
  title: string;
}

function readTitles(path: string, warnings: string[]): TitleRow[] {
  const rows: TitleRow[] = [];
  const lines = readFileSync(path, "utf-8").split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = (lines[i] as string).trim();
    if (line === "") {
      continue;
    }
    let parsed: unknown;
    try {
      parsed = JSON.parse(line);
    } catch (err) {
      throw new Error(`${path} line ${i + 1}: invalid JSON`);
    }
    const rec = parsed as { id?: unknown; title?: unknown };
    if (typeof rec.id !== "string" || rec.id === "") {
      throw new Error(`${path} line ${i + 1}: missing or empty id`);
    }
    if (typeof rec.title !== "string") {
      throw new Error(`${path} line ${i + 1}: missing title for id '${rec.id}'`);
    }
    if (rec.title.trim() === "") {
      warnings.push(`line ${i + 1}: empty title for id '${rec.id}', skipped`);
      continue;
    }
    rows.push({ id: rec.id, title: rec.title });
  }
  return rows;
}

/**
 * Encode every non-empty title and write the embedding file. Input
 * order is preserved; empty titles are skipped and reported in the
 * manifest's warnings. Vectors are L2-normalized before writing.
 */
export async function exportEmbeddings(options: ExportOptions): Promise<ExportManifest> {
  const model = options.model ?? DEFAULT_MODEL;
  const batchSize = options.batchSize ?? 32;
  if (!Number.isInteger(batchSize) || batchSize < 1) {
    throw new Error(`batch size must be a positive integer, got ${batchSize}`);
  }
  const warnings: string[] = [];
  const rows = readTitles(options.input, warnings);
  if (rows.length === 0) {
    throw new Error(`${options.input}: no encodable titles`);
  }

  const encoder = await loadEncoder(model, batchSize);
  const vectors = await encoder.encode(rows.map((r) => r.title));
  const first = vectors[0];
  if (vectors.length !== rows.length || first === undefined) {
    throw new Error(
      `encoder returned ${vectors.length} vectors for ${rows.length} titles`,
    );
  }
  const dim = first.length;
  const records: EmbeddingRecord[] = rows.map((row, i) => {
    const vec = vectors[i] as number[];
    if (vec.length !== dim) {
      throw new Error(`inconsistent dimension for id '${row.id}': ${vec.length} != ${dim}`);
    }
    return { id: row.id, vector: l2Normalize(vec) };
  });

  writeFileSync(options.output, embeddingFileText(records, dim), "utf-8");
  return {
    model_name: model,
    dim,
    count: records.length,
    normalized: true,
    warnings,
  };
}
