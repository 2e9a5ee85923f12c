/** Annotation session state machine.
 *
 * Holds the anonymized sample queue (shuffled per annotator to reduce order
 * effects), validates each response for completeness before accepting it,
 * rejects double submissions, and serializes accepted records to the JSONL
 * format the scoring pipeline consumes.
 */

import type {
  AnnotationRecord,
  ClusterPayload,
  Response,
  SamplePayload,
} from "./types.js";

export class SubmissionError extends Error {}

const INTERPRETABILITY = new Set(["good", "neutral", "bad"]);
const USEFULNESS_KEYWORD = new Set(["useful", "average", "useless"]);
const USEFULNESS_CLUSTER = new Set(["useful", "useless"]);
const INTRUDER_PICKS = new Set(["0", "1", "2", "3", "4", "unsure"]);

/** Deterministic 32-bit string hash (FNV-1a). */
export function hashString(text: string): number {
  let h = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 0x01000193);
  }
  return h >>> 0;
}

/** mulberry32: small seeded PRNG, good enough for presentation shuffles. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function seededShuffle<T>(items: readonly T[], seed: number): T[] {
  const rand = mulberry32(seed);
  const out = items.slice();
  for (let i = out.length - 1; i > 0; i--) {
    const j = Math.floor(rand() * (i + 1));
    const tmp = out[i] as T;
    out[i] = out[j] as T;
    out[j] = tmp;
  }
  return out;
}

export class TaskSession {
  readonly annotatorId: string;
  readonly queue: SamplePayload[];
  private cursor = 0;
  private readonly submitted = new Set<string>();
  readonly records: AnnotationRecord[] = [];

  constructor(annotatorId: string, samples: SamplePayload[]) {
    if (!annotatorId.trim()) throw new SubmissionError("annotator id required");
    this.annotatorId = annotatorId.trim();
    this.queue = seededShuffle(samples, hashString(this.annotatorId));
  }

  current(): SamplePayload | null {
    return this.cursor < this.queue.length
      ? (this.queue[this.cursor] as SamplePayload)
      : null;
  }

  progress(): { done: number; total: number } {
    return { done: this.cursor, total: this.queue.length };
  }

  finished(): boolean {
    return this.cursor >= this.queue.length;
  }

  /** Validate and accept the response for the current sample. */
  submit(response: Partial<Response>): AnnotationRecord {
    const sample = this.current();
    if (sample === null) throw new SubmissionError("session already finished");
    if (this.submitted.has(sample.sample_id)) {
      throw new SubmissionError(
        `sample ${sample.sample_id} already has a response`
      );
    }
    const interp = response.interpretability;
    if (!interp || !INTERPRETABILITY.has(interp)) {
      throw new SubmissionError("interpretability rating is required");
    }
    const usefulness = response.usefulness;
    const record: AnnotationRecord = {
      sample_id: sample.sample_id,
      annotator_id: this.annotatorId,
      task: sample.task,
      interpretability: interp,
      usefulness: usefulness as AnnotationRecord["usefulness"],
    };
    if (sample.task === "keyword") {
      if (!usefulness || !USEFULNESS_KEYWORD.has(usefulness)) {
        throw new SubmissionError("usefulness rating is required");
      }
      if ((response as { intruderPick?: string }).intruderPick !== undefined) {
        throw new SubmissionError("keyword task takes no intruder pick");
      }
    } else {
      if (!usefulness || !USEFULNESS_CLUSTER.has(usefulness)) {
        throw new SubmissionError("usefulness rating is required");
      }
      const pick = (response as { intruderPick?: string }).intruderPick;
      if (!pick || !INTRUDER_PICKS.has(pick)) {
        throw new SubmissionError("pick the intruder or choose unsure");
      }
      record.intruder_pick = pick as AnnotationRecord["intruder_pick"];
    }
    this.submitted.add(sample.sample_id);
    this.records.push(record);
    this.cursor += 1;
    return record;
  }

  exportJsonl(): string {
    return (
      this.records
        .map((rec) => {
          const ordered: Record<string, unknown> = {
            annotator_id: rec.annotator_id,
            interpretability: rec.interpretability,
            sample_id: rec.sample_id,
            task: rec.task,
            usefulness: rec.usefulness,
          };
          if (rec.task === "cluster") ordered["intruder_pick"] = rec.intruder_pick;
          return JSON.stringify(
            ordered,
            Object.keys(ordered).sort()
          );
        })
        .join("\n") + "\n"
    );
  }

  /** Serializable snapshot for resuming a session (localStorage). */
  snapshot(): string {
    return JSON.stringify({
      annotator_id: this.annotatorId,
      cursor: this.cursor,
      records: this.records,
    });
  }

  static resume(samples: SamplePayload[], snapshot: string): TaskSession {
    const raw = JSON.parse(snapshot) as {
      annotator_id: string;
      cursor: number;
      records: AnnotationRecord[];
    };
    const session = new TaskSession(raw.annotator_id, samples);
    for (const rec of raw.records) {
      session.records.push(rec);
      session.submitted.add(rec.sample_id);
    }
    session.cursor = raw.cursor;
    return session;
  }
}

export function positionLabel(sample: ClusterPayload, position: number): string {
  const item = sample.items[position];
  return item ? item.text : "";
}
