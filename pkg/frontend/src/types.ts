/** Documents exchanged with the annotation service. */

export interface TokenDoc {
  form: string;
  tag: string;
  changed: boolean;
}

export interface VerseDoc {
  id: string;
  tokens: TokenDoc[];
}

export interface SliceDoc {
  iteration: number;
  verses: VerseDoc[];
}

export interface MetricsRecordDoc {
  state: string;
  accuracy: number;
  error_rate: number;
  transformation_rate: number;
  token_total: number;
  correct_count: number;
  in_target_count: number;
}

export interface StateDoc {
  iteration: number;
  verses_total: number;
  selected_count: number;
  corrected_count: number;
  pending_count: number;
  schedule_iterations: number;
  tagset: string;
  tagset_labels: string[];
  metrics: MetricsRecordDoc[];
}

export interface TagsetDoc {
  name: string;
  entries: [string, string][];
}

export interface CorrectionAck {
  ok: boolean;
  verse_id: string;
  pending_remaining: number;
}

export interface IterateResult {
  ok: boolean;
  record: MetricsRecordDoc;
}
