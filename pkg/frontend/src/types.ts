/** Wire types shared with the scoring pipeline (formats owned by evalkit). */

export interface KeywordPayload {
  sample_id: string;
  task: "keyword";
  keywords: string[];
}

export interface ClusterItem {
  position: number;
  text: string;
}

export interface ClusterPayload {
  sample_id: string;
  task: "cluster";
  items: ClusterItem[];
}

export type SamplePayload = KeywordPayload | ClusterPayload;

export type Interpretability = "good" | "neutral" | "bad";
export type KeywordUsefulness = "useful" | "average" | "useless";
export type ClusterUsefulness = "useful" | "useless";
/** Presented position "0".."4", or "unsure" to discourage guessing. */
export type IntruderPick = "0" | "1" | "2" | "3" | "4" | "unsure";

export interface AnnotationRecord {
  sample_id: string;
  annotator_id: string;
  task: "keyword" | "cluster";
  interpretability: Interpretability;
  usefulness: KeywordUsefulness | ClusterUsefulness;
  intruder_pick?: IntruderPick;
}

export interface KeywordResponse {
  interpretability: Interpretability;
  usefulness: KeywordUsefulness;
}

export interface ClusterResponse {
  interpretability: Interpretability;
  usefulness: ClusterUsefulness;
  intruderPick: IntruderPick;
}

export type Response = KeywordResponse | ClusterResponse;
