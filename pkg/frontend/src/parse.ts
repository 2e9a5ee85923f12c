/** Sample batch parsing with structural anonymity enforcement.
 *
 * The annotator must never see model identity or the intruder answer, so a
 * payload file containing any answer-side field is rejected outright
 * rather than filtered: a leaky batch is a packaging bug upstream.
 */

import type { ClusterPayload, KeywordPayload, SamplePayload } from "./types.js";

export class PayloadError extends Error {}

export class PayloadLeakError extends PayloadError {
  constructor(public readonly key: string, sampleId: string) {
    super(`payload for sample ${sampleId} leaks answer field "${key}"`);
  }
}

const FORBIDDEN_KEYS = new Set([
  "model_tag",
  "intruder_position",
  "intruder_doc_id",
  "intruder",
  "member_doc_ids",
  "presented_order",
  "topic",
  "answers",
]);

function scanForLeaks(value: unknown, sampleId: string): void {
  if (Array.isArray(value)) {
    for (const item of value) scanForLeaks(item, sampleId);
    return;
  }
  if (value !== null && typeof value === "object") {
    for (const [key, inner] of Object.entries(value as object)) {
      if (FORBIDDEN_KEYS.has(key)) throw new PayloadLeakError(key, sampleId);
      scanForLeaks(inner, sampleId);
    }
  }
}

function asKeyword(raw: Record<string, unknown>, sid: string): KeywordPayload {
  const keywords = raw["keywords"];
  if (!Array.isArray(keywords) || keywords.length === 0) {
    throw new PayloadError(`sample ${sid}: keyword task without keywords`);
  }
  return { sample_id: sid, task: "keyword", keywords: keywords.map(String) };
}

function asCluster(raw: Record<string, unknown>, sid: string): ClusterPayload {
  const items = raw["items"];
  if (!Array.isArray(items) || items.length !== 5) {
    throw new PayloadError(`sample ${sid}: cluster task needs exactly 5 items`);
  }
  const parsed = items.map((item, i) => {
    const rec = item as Record<string, unknown>;
    if (typeof rec["text"] !== "string" || rec["position"] !== i) {
      throw new PayloadError(`sample ${sid}: item ${i} malformed`);
    }
    return { position: i, text: rec["text"] };
  });
  return { sample_id: sid, task: "cluster", items: parsed };
}

export function parseSamples(jsonl: string): SamplePayload[] {
  const out: SamplePayload[] = [];
  const seen = new Set<string>();
  const lines = jsonl.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i] ?? "";
    if (!line.trim()) continue;
    let raw: unknown;
    try {
      raw = JSON.parse(line);
    } catch {
      throw new PayloadError(`line ${i + 1}: invalid JSON`);
    }
    if (raw === null || typeof raw !== "object" || Array.isArray(raw)) {
      throw new PayloadError(`line ${i + 1}: not an object`);
    }
    const rec = raw as Record<string, unknown>;
    const sid = String(rec["sample_id"] ?? "");
    if (!sid) throw new PayloadError(`line ${i + 1}: missing sample_id`);
    if (seen.has(sid)) throw new PayloadError(`duplicate sample_id ${sid}`);
    seen.add(sid);
    scanForLeaks(rec, sid);
    const task = rec["task"];
    if (task === "keyword") out.push(asKeyword(rec, sid));
    else if (task === "cluster") out.push(asCluster(rec, sid));
    else throw new PayloadError(`sample ${sid}: unknown task ${String(task)}`);
  }
  if (out.length === 0) throw new PayloadError("empty sample batch");
  return out;
}
