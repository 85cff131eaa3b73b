import { ApiClient, ApiError } from "./api";
import type { SliceDoc, StateDoc } from "./types";

/**
 * Client-side session state: the pending slice, the local (unsubmitted) edit
 * buffer, and the metrics history. Edits are keyed by verse id and token
 * index, so re-fetching the slice never loses them; they leave the buffer
 * only when the service acknowledges the verse.
 */
export class AppStore {
  api: ApiClient;
  state: StateDoc | null = null;
  slice: SliceDoc | null = null;
  tagsetLabels: string[] = [];
  metricsCsv = "";
  /** verse id -> token index -> chosen label */
  edits = new Map<string, Map<number, string>>();
  doneVerses = new Set<string>();
  iterating = false;
  lastError = "";

  constructor(api: ApiClient) {
    this.api = api;
  }

  async init(): Promise<void> {
    this.state = await this.api.getState();
    const tagset = await this.api.getTagset();
    // the picker offers exactly what the service delivered, nothing else
    this.tagsetLabels = tagset.entries.map(([label]) => label);
    this.metricsCsv = await this.api.getMetricsCsv();
    await this.loadSlice();
  }

  get sliceIteration(): number {
    if (!this.state) throw new Error("store not initialized");
    return this.state.iteration + 1;
  }

  get scheduleDone(): boolean {
    return this.state !== null && this.state.iteration >= this.state.schedule_iterations;
  }

  async loadSlice(): Promise<void> {
    if (!this.state) throw new Error("store not initialized");
    if (this.scheduleDone) {
      this.slice = { iteration: this.state.iteration, verses: [] };
      return;
    }
    this.slice = await this.api.getSlice(this.sliceIteration);
    this.doneVerses.clear();
  }

  pendingVerses(): SliceDoc["verses"] {
    if (!this.slice) return [];
    return this.slice.verses.filter((verse) => !this.doneVerses.has(verse.id));
  }

  get allCorrected(): boolean {
    return this.pendingVerses().length === 0;
  }

  setEdit(verseId: string, index: number, label: string): void {
    if (!this.tagsetLabels.includes(label)) {
      throw new Error(`label ${label} is not in the target tagset`);
    }
    let verseEdits = this.edits.get(verseId);
    if (!verseEdits) {
      verseEdits = new Map();
      this.edits.set(verseId, verseEdits);
    }
    verseEdits.set(index, label);
  }

  clearEdit(verseId: string, index: number): void {
    this.edits.get(verseId)?.delete(index);
  }

  editsFor(verseId: string): [number, string][] {
    const verseEdits = this.edits.get(verseId);
    if (!verseEdits) return [];
    return [...verseEdits.entries()].sort((a, b) => a[0] - b[0]);
  }

  /** Tag to display for a token: the local edit if present, else the served tag. */
  displayTag(verseId: string, index: number, servedTag: string): string {
    return this.edits.get(verseId)?.get(index) ?? servedTag;
  }

  /**
   * Submit one verse: its edits plus tacit acceptance of everything else.
   * On acknowledgment the verse collapses to done and its edits clear; on
   * rejection the local edits stay untouched for the user to retry.
   */
  async submitVerse(verseId: string): Promise<void> {
    try {
      await this.api.postCorrections(verseId, this.editsFor(verseId));
    } catch (err) {
      if (err instanceof ApiError) {
        this.lastError = err.message;
      }
      throw err;
    }
    this.lastError = "";
    this.doneVerses.add(verseId);
    this.edits.delete(verseId);
  }

  /** Run one training iteration, then refresh metrics, state, and the next slice. */
  async iterate(): Promise<void> {
    if (this.iterating) return;
    this.iterating = true;
    try {
      await this.api.postIterate();
      this.state = await this.api.getState();
      this.metricsCsv = await this.api.getMetricsCsv();
      this.edits.clear();
      await this.loadSlice();
      this.lastError = "";
    } catch (err) {
      if (err instanceof ApiError) {
        this.lastError = err.message;
      }
      throw err;
    } finally {
      this.iterating = false;
    }
  }
}
