// Payload shapes of the review service API. The UI mirrors these
// exactly; it never reorders options or invents fields.

export type Verdict = "appropriate" | "inappropriate";

export type TargetId = "stem" | "distractor_1" | "distractor_2" | "distractor_3";

export interface OwnVerdict {
  verdict: Verdict;
  comment: string;
}

export interface ItemView {
  item_id: number;
  stem: string;
  options: string[];
  targets: TargetId[];
  target_words: Record<string, string | null>;
  own_verdicts: Record<string, OwnVerdict>;
}

export interface KindStats {
  kappa: number;
  kappa_degenerate: boolean;
  n: number;
  percent_agreement: number;
  percent_agreement_exact: string;
  reviewers: string[];
}

export type StatsReport = Record<string, KindStats>;

export interface SubmitResult {
  ok: boolean;
  status: number;
  detail: string;
}
