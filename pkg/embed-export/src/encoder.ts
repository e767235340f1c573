/**
 * Title encoders. Two schemes:
 *
 * - a pretrained sentence-embedding model by name (loaded through
 *   @xenova/transformers, mean pooling, normalized), the default being
 *   Xenova/all-MiniLM-L6-v2;
 * - `hash:<dim>`, a deterministic offline encoder that derives a
 *   pseudo-random unit vector from the title bytes. No semantics, but
 *   stable across runs and platforms, which is what the format tests
 *   and air-gapped pipelines need.
 */

import { l2Normalize } from "./format.js";

export const DEFAULT_MODEL = "Xenova/all-MiniLM-L6-v2";

export interface Encoder {
  readonly name: string;
  encode(texts: string[]): Promise<number[][]>;
}

function fnv1a(text: string): number {
  let h = 0x811c9dc5;
  for (const byte of new TextEncoder().encode(text)) {
    h ^= byte;
    h = Math.imul(h, 0x01000193) >>> 0;
  }
  return h >>> 0;
}

// mulberry32: integer ops only, so the stream is identical everywhere
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function hashEncoder(name: string, dim: number): Encoder {
  return {
    name,
    encode: async (texts) =>
      texts.map((text) => {
        const next = mulberry32(fnv1a(text));
        const vector = Array.from({ length: dim }, () => next() * 2 - 1);
        return l2Normalize(vector);
      }),
  };
}

// Resolved at runtime only: the package is an optional dependency, and a
// literal specifier would make the compiler require it at build time.
const TRANSFORMERS_MODULE = "@xenova/transformers";

async function transformerEncoder(model: string, batchSize: number): Promise<Encoder> {
  let pipeline: (task: string, model: string) => Promise<any>;
  try {
    ({ pipeline } = await import(TRANSFORMERS_MODULE));
  } catch (err) {
    throw new Error(
      `cannot load ${TRANSFORMERS_MODULE} (install it to use pretrained models): ` +
        message(err),
    );
  }
  let extractor: any;
  try {
    extractor = await pipeline("feature-extraction", model);
  } catch (err) {
    throw new Error(`cannot load model '${model}': ${message(err)}`);
  }
  return {
    name: model,
    async encode(texts) {
      const out: number[][] = [];
      for (let start = 0; start < texts.length; start += batchSize) {
        const batch = texts.slice(start, start + batchSize);
        const result = await extractor(batch, { pooling: "mean", normalize: true });
        const [rows, dim] = result.dims as [number, number];
        const data = result.data as Float32Array;
        for (let r = 0; r < rows; r++) {
          out.push(Array.from(data.subarray(r * dim, (r + 1) * dim)));
        }
      }
      return out;
    },
  };
}

function message(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}

export async function loadEncoder(model: string, batchSize: number): Promise<Encoder> {
  if (model.startsWith("hash:")) {
    const spec = model.slice("hash:".length);
    if (!/^\d+$/.test(spec) || Number(spec) < 1) {
      throw new Error(`bad hash encoder dimension '${spec}' (want hash:<positive integer>)`);
    }
    return hashEncoder(model, Number(spec));
  }
  return transformerEncoder(model, batchSize);
}
