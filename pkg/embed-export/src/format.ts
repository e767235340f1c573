/**
 * The tab-separated embedding file format consumed by the wikihoax
 * toolkit: a `dim=<d> count=<n>` header line, then one record per line
 * with the id followed by one field per vector component.
 */

export interface EmbeddingRecord {
  id: string;
  vector: number[];
}

/**
 * Render a float with 8 significant digits and no trailing zeros.
 * Enough precision that cosine rankings survive the text round trip.
 */
export function format8(value: number): string {
  if (!Number.isFinite(value)) {
    throw new Error(`non-finite vector component: ${value}`);
  }
  if (value === 0) {
    return "0";
  }
  const s = value.toPrecision(8);
  if (s.includes("e")) {
    const [mantissa, exponent] = s.split("e");
    const m = (mantissa as string).replace(/0+$/, "").replace(/\.$/, "");
    return `${m}e${exponent}`;
  }
  if (s.includes(".")) {
    return s.replace(/0+$/, "").replace(/\.$/, "");
  }
  return s;
}

export function embeddingFileText(records: EmbeddingRecord[], dim: number): string {
  const lines = [`dim=${dim} count=${records.length}`];
  for (const rec of records) {
    if (rec.vector.length !== dim) {
      throw new Error(
        `record '${rec.id}' has ${rec.vector.length} components, expected ${dim}`,
      );
    }
    lines.push([rec.id, ...rec.vector.map(format8)].join("\t"));
  }
  return lines.join("\n") + "\n";
}

/**
 * Parse the format back. Mirrors the consumer's validation so tests can
 * check the round trip without the consumer installed.
 */
export function parseEmbeddingFileText(text: string): {
  dim: number;
  records: EmbeddingRecord[];
} {
  const lines = text.split("\n");
  const header = (lines[0] ?? "").trim();
  const match = /^dim=(\d+) count=(\d+)$/.exec(header);
  if (!match) {
    throw new Error(`bad embedding header: '${header}'`);
  }
  const dim = Number(match[1]);
  const count = Number(match[2]);
  const records: EmbeddingRecord[] = [];
  for (let i = 1; i < lines.length; i++) {
    const line = lines[i] as string;
    if (line.trim() === "") {
      continue;
    }
    const fields = line.split("\t");
    if (fields.length !== dim + 1) {
      throw new Error(`line ${i + 1}: expected ${dim} values, got ${fields.length - 1}`);
    }
    const vector = fields.slice(1).map(Number);
    if (vector.some((v) => !Number.isFinite(v))) {
      throw new Error(`line ${i + 1}: non-finite component`);
    }
    records.push({ id: fields[0] as string, vector });
  }
  if (records.length !== count) {
    throw new Error(`header claims count=${count} but file has ${records.length} records`);
  }
  return { dim, records };
}

export function l2Normalize(vector: number[]): number[] {
  let sq = 0;
  for (const v of vector) {
    sq += v * v;
  }
  const norm = Math.sqrt(sq);
  if (norm === 0) {
    throw new Error("cannot normalize a zero vector");
  }
  return vector.map((v) => v / norm);
}
