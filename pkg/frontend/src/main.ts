/** DOM wiring for the static annotation app.
 *
 * Load a samples.jsonl batch, enter an annotator id, rate each sample,
 * download the records as JSONL. Progress persists in localStorage so a
 * closed tab can resume. No network calls anywhere.
 */

import { CLUSTER_CRITERIA, KEYWORD_CRITERIA } from "./config.js";
import { parseSamples } from "./parse.js";
import { hashString, SubmissionError, TaskSession } from "./session.js";
import type { SamplePayload } from "./types.js";

let session: TaskSession | null = null;
let batchKey = "";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function storageKey(): string {
  return `stormtopics-annotator:${batchKey}:${session?.annotatorId ?? ""}`;
}

function radioGroup(name: string, options: [string, string][]): string {
  return options
    .map(
      ([value, label]) => `
      <label class="option">
        <input type="radio" name="${name}" value="${value}"> ${label}
      </label>`
    )
    .join("");
}

function escapeHtml(text: string): string {
  const div = document.createElement("div");
  div.textContent = text;
  return div.innerHTML;
}

function renderCurrent(): void {
  const panel = el<HTMLDivElement>("panel");
  const status = el<HTMLParagraphElement>("status");
  if (!session) return;
  const { done, total } = session.progress();
  const sample = session.current();
  if (!sample) {
    panel.innerHTML = `<p class="done">All ${total} samples annotated.
      Download your records and send the file to the study organizer.</p>`;
    status.textContent = `${done}/${total}`;
    el<HTMLButtonElement>("export").disabled = session.records.length === 0;
    return;
  }
  status.textContent = `sample ${done + 1} of ${total}`;
  if (sample.task === "keyword") {
    const kw = sample.keywords.map((w) => `<li>${escapeHtml(w)}</li>`).join("");
    panel.innerHTML = `
      <h2>Topic keywords</h2>
      <ol class="keywords">${kw}</ol>
      <fieldset><legend>Interpretability</legend>
        ${radioGroup("interpretability", [
          ["good", KEYWORD_CRITERIA.interpretability.good],
          ["neutral", KEYWORD_CRITERIA.interpretability.neutral],
          ["bad", KEYWORD_CRITERIA.interpretability.bad],
        ])}
      </fieldset>
      <fieldset><legend>Usefulness</legend>
        ${radioGroup("usefulness", [
          ["useful", KEYWORD_CRITERIA.usefulness.useful],
          ["average", KEYWORD_CRITERIA.usefulness.average],
          ["useless", KEYWORD_CRITERIA.usefulness.useless],
        ])}
      </fieldset>
      <button id="submit">Submit</button>
      <p id="error" class="error"></p>`;
  } else {
    const docs = sample.items
      .map(
        (item) => `
        <label class="option tweet">
          <input type="radio" name="intruder" value="${item.position}">
          <span>${escapeHtml(item.text)}</span>
        </label>`
      )
      .join("");
    panel.innerHTML = `
      <h2>Which tweet is the intruder?</h2>
      <p class="criteria">${CLUSTER_CRITERIA.intruder}</p>
      <div class="tweets">${docs}
        <label class="option"><input type="radio" name="intruder" value="unsure"> unsure</label>
      </div>
      <fieldset><legend>Interpretability</legend>
        ${radioGroup("interpretability", [
          ["good", CLUSTER_CRITERIA.interpretability.good],
          ["neutral", CLUSTER_CRITERIA.interpretability.neutral],
          ["bad", CLUSTER_CRITERIA.interpretability.bad],
        ])}
      </fieldset>
      <fieldset><legend>Usefulness</legend>
        ${radioGroup("usefulness", [
          ["useful", CLUSTER_CRITERIA.usefulness.useful],
          ["useless", CLUSTER_CRITERIA.usefulness.useless],
        ])}
      </fieldset>
      <button id="submit">Submit</button>
      <p id="error" class="error"></p>`;
  }
  el<HTMLButtonElement>("submit").addEventListener("click", onSubmit);
}

function picked(name: string): string | undefined {
  const node = document.querySelector<HTMLInputElement>(
    `input[name="${name}"]:checked`
  );
  return node?.value;
}

function onSubmit(): void {
  if (!session) return;
  const sample = session.current();
  if (!sample) return;
  try {
    session.submit({
      interpretability: picked("interpretability") as never,
      usefulness: picked("usefulness") as never,
      ...(sample.task === "cluster"
        ? { intruderPick: picked("intruder") as never }
        : {}),
    });
  } catch (err) {
    if (err instanceof SubmissionError) {
      el<HTMLParagraphElement>("error").textContent = err.message;
      return;
    }
    throw err;
  }
  localStorage.setItem(storageKey(), session.snapshot());
  renderCurrent();
}

function startSession(samples: SamplePayload[], annotatorId: string): void {
  session = new TaskSession(annotatorId, samples);
  const saved = localStorage.getItem(storageKey());
  if (saved) {
    try {
      session = TaskSession.resume(samples, saved);
    } catch {
      localStorage.removeItem(storageKey());
    }
  }
  el<HTMLDivElement>("setup").hidden = true;
  el<HTMLDivElement>("workspace").hidden = false;
  renderCurrent();
}

function init(): void {
  const fileInput = el<HTMLInputElement>("batch");
  const start = el<HTMLButtonElement>("start");
  start.addEventListener("click", async () => {
    const error = el<HTMLParagraphElement>("setup-error");
    error.textContent = "";
    const annotator = el<HTMLInputElement>("annotator").value;
    const file = fileInput.files?.[0];
    if (!file) {
      error.textContent = "choose a samples.jsonl file first";
      return;
    }
    try {
      const text = await file.text();
      batchKey = String(hashString(text));
      startSession(parseSamples(text), annotator);
    } catch (err) {
      error.textContent = err instanceof Error ? err.message : String(err);
    }
  });
  el<HTMLButtonElement>("export").addEventListener("click", () => {
    if (!session || session.records.length === 0) return;
    const blob = new Blob([session.exportJsonl()], {
      type: "application/jsonl",
    });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = `records_${session.annotatorId}.jsonl`;
    link.click();
    URL.revokeObjectURL(link.href);
  });
}

document.addEventListener("DOMContentLoaded", init);
