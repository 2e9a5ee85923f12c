/** Cross-component oracle: records exported by simulated UI sessions are
 * scored by the Python pipeline's score-eval and must reproduce the rates
 * the script implies.
 */

import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { parseSamples } from "../src/parse";
import { TaskSession } from "../src/session";

const FIXTURES = join(__dirname, "fixtures");

interface Answer {
  sample_id: string;
  task: "keyword" | "cluster";
  intruder_position?: number;
}

function readAnswers(): Map<string, Answer> {
  const text = readFileSync(join(FIXTURES, "answers.jsonl"), "utf-8");
  const map = new Map<string, Answer>();
  for (const line of text.split("\n")) {
    if (!line.trim()) continue;
    const rec = JSON.parse(line) as Answer;
    map.set(rec.sample_id, rec);
  }
  return map;
}

function readCsv(path: string): { header: string[]; rows: string[][] } {
  const lines = readFileSync(path, "utf-8").trim().split("\n");
  const header = (lines[0] ?? "").split(",");
  return { header, rows: lines.slice(1).map((l) => l.split(",")) };
}

describe("UI export scored by the Python pipeline", () => {
  it("reproduces hand-computed rates", () => {
    const samples = parseSamples(
      readFileSync(join(FIXTURES, "samples.jsonl"), "utf-8")
    );
    const answers = readAnswers();

    // ann1: always correct, all-positive ratings; ann2: always unsure,
    // all-negative ratings. Every per-topic mean is therefore exactly 0.5
    // (correct rate, unsure rate, interpretability, usefulness).
    const sessions = [
      { annotator: "ann1", correct: true, interp: "good", positive: true },
      { annotator: "ann2", correct: false, interp: "bad", positive: false },
    ] as const;
    const recordLines: string[] = [];
    for (const spec of sessions) {
      const session = new TaskSession(spec.annotator, samples);
      while (!session.finished()) {
        const sample = session.current();
        if (!sample) break;
        if (sample.task === "keyword") {
          session.submit({
            interpretability: spec.interp,
            usefulness: spec.positive ? "useful" : "useless",
          });
        } else {
          const answer = answers.get(sample.sample_id);
          expect(answer?.intruder_position).not.toBeUndefined();
          session.submit({
            interpretability: spec.interp,
            usefulness: spec.positive ? "useful" : "useless",
            intruderPick: spec.correct
              ? (String(answer?.intruder_position) as never)
              : "unsure",
          });
        }
      }
      recordLines.push(session.exportJsonl().trimEnd());
    }

    const workdir = mkdtempSync(join(tmpdir(), "annotator-"));
    const recordsPath = join(workdir, "records.jsonl");
    writeFileSync(recordsPath, recordLines.join("\n") + "\n");
    execFileSync(
      "python3",
      [
        "-m", "stormtopics.cli", "score-eval",
        "--records", recordsPath,
        "--answers", join(FIXTURES, "answers.jsonl"),
        "--out", join(workdir, "scores"),
      ],
      { stdio: "pipe" }
    );

    const figure = readCsv(join(workdir, "scores", "figure3.csv"));
    expect(figure.header).toEqual(["model", "task", "metric", "topic", "score"]);
    expect(figure.rows.length).toBeGreaterThan(0);
    for (const row of figure.rows) {
      // every metric averages one all-positive and one all-negative rating
      expect(Number(row[4])).toBeCloseTo(0.5, 12);
    }
    const clusterMetrics = new Set(
      figure.rows.filter((r) => r[1] === "cluster").map((r) => r[2])
    );
    expect(clusterMetrics).toEqual(
      new Set([
        "interpretability",
        "usefulness",
        "correct_intruders",
        "unknown_intruders",
      ])
    );

    const summary = readCsv(join(workdir, "scores", "summary_cluster.csv"));
    expect(summary.header).toEqual([
      "model", "metric", "average_score", "topics_above_half", "fleiss_kappa",
    ]);
    for (const row of summary.rows) {
      expect(Number(row[2])).toBeCloseTo(0.5, 12);
      expect(row[3]).toBe("0");
    }
  });

  it("scores a unanimous-good session as 1.0 everywhere", () => {
    const samples = parseSamples(
      readFileSync(join(FIXTURES, "samples.jsonl"), "utf-8")
    );
    const answers = readAnswers();
    const lines: string[] = [];
    for (const annotator of ["u1", "u2"]) {
      const session = new TaskSession(annotator, samples);
      while (!session.finished()) {
        const sample = session.current();
        if (!sample) break;
        if (sample.task === "keyword") {
          session.submit({ interpretability: "good", usefulness: "useful" });
        } else {
          session.submit({
            interpretability: "good",
            usefulness: "useful",
            intruderPick: String(
              answers.get(sample.sample_id)?.intruder_position
            ) as never,
          });
        }
      }
      lines.push(session.exportJsonl().trimEnd());
    }
    const workdir = mkdtempSync(join(tmpdir(), "annotator-"));
    const recordsPath = join(workdir, "records.jsonl");
    writeFileSync(recordsPath, lines.join("\n") + "\n");
    execFileSync(
      "python3",
      [
        "-m", "stormtopics.cli", "score-eval",
        "--records", recordsPath,
        "--answers", join(FIXTURES, "answers.jsonl"),
        "--out", join(workdir, "scores"),
      ],
      { stdio: "pipe" }
    );
    const figure = readCsv(join(workdir, "scores", "figure3.csv"));
    for (const row of figure.rows) {
      const expected = row[2] === "unknown_intruders" ? 0.0 : 1.0;
      expect(Number(row[4])).toBeCloseTo(expected, 12);
    }
  });
});
