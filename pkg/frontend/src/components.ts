import { parseMetricsCsv, renderChartSvg } from "./chart";
import { filterLabels, initialPicker, PickerState, pickerKeydown } from "./picker";
import { AppStore } from "./store";
import type { VerseDoc } from "./types";

/**
 * DOM layer: one render pass over the store, re-run after every state change.
 * The only client-held state outside the store is which token's picker is open.
 */

interface PickerTarget {
  verseId: string;
  index: number;
  state: PickerState;
}

export class App {
  store: AppStore;
  root: HTMLElement;
  pickerTarget: PickerTarget | null = null;
  banner = "";

  constructor(store: AppStore, root: HTMLElement) {
    this.store = store;
    this.root = root;
  }

  async start(): Promise<void> {
    try {
      await this.store.init();
      this.banner = "";
    } catch {
      this.banner = "service unreachable - check the server and retry";
    }
    this.render();
  }

  render(): void {
    this.root.textContent = "";
    if (this.banner) {
      const banner = el("div", "banner error");
      banner.textContent = this.banner;
      const retry = el("button", "retry") as HTMLButtonElement;
      retry.textContent = "retry";
      retry.addEventListener("click", () => void this.start());
      banner.appendChild(retry);
      this.root.appendChild(banner);
      return;
    }
    if (!this.store.state) return;
    this.root.appendChild(this.renderHeader());
    this.root.appendChild(this.renderChart());
    if (this.store.lastError) {
      const note = el("div", "banner error inline-error");
      note.textContent = this.store.lastError;
      this.root.appendChild(note);
    }
    this.root.appendChild(this.renderSlice());
  }

  private renderHeader(): HTMLElement {
    const state = this.store.state!;
    const header = el("header", "topbar");
    const title = el("h1");
    title.textContent = `annotation - iteration ${state.iteration} of ${state.schedule_iterations}`;
    const counts = el("span", "counts");
    counts.textContent =
      `${state.corrected_count}/${state.selected_count} verses corrected, ` +
      `${this.store.pendingVerses().length} open here`;
    const iterate = el("button", "iterate") as HTMLButtonElement;
    iterate.id = "iterate";
    const pendingCount = this.store.pendingVerses().length;
    if (this.store.scheduleDone) {
      iterate.textContent = "schedule complete";
      iterate.disabled = true;
    } else if (this.store.iterating) {
      iterate.textContent = "training...";
      iterate.disabled = true;
    } else if (!this.store.allCorrected) {
      iterate.textContent = `train next (${pendingCount} pending)`;
      iterate.disabled = true;
    } else {
      iterate.textContent = "train next iteration";
      iterate.disabled = false;
    }
    iterate.addEventListener("click", () => {
      void this.runIterate();
    });
    header.append(title, counts, iterate);
    return header;
  }

  private async runIterate(): Promise<void> {
    this.render(); // repaint with the button disabled
    try {
      await this.store.iterate();
    } catch {
      // store.lastError carries the message; local edits are untouched
    }
    this.render();
  }

  private renderChart(): HTMLElement {
    const wrap = el("section", "chart");
    wrap.id = "chart";
    wrap.innerHTML = renderChartSvg(parseMetricsCsv(this.store.metricsCsv));
    const legend = el("div", "legend");
    legend.innerHTML =
      '<span class="key key-accuracy">accuracy</span>' +
      '<span class="key key-transformation">transformation rate</span>';
    wrap.appendChild(legend);
    return wrap;
  }

  private renderSlice(): HTMLElement {
    const section = el("section", "slice");
    const pending = this.store.pendingVerses();
    if (pending.length === 0) {
      const done = el("div", "all-done");
      done.textContent = this.store.scheduleDone
        ? "schedule complete - all iterations trained"
        : "all corrected - ready to iterate";
      section.appendChild(done);
      return section;
    }
    for (const verse of pending) {
      section.appendChild(this.renderVerse(verse));
    }
    return section;
  }

  private renderVerse(verse: VerseDoc): HTMLElement {
    const card = el("article", "verse-card");
    card.dataset.verseId = verse.id;
    const head = el("div", "verse-head");
    const name = el("span", "verse-id");
    name.textContent = verse.id;
    const editCount = this.store.editsFor(verse.id).length;
    const submit = el("button", "submit") as HTMLButtonElement;
    submit.textContent = editCount ? `submit (${editCount} edits)` : "accept as-is";
    submit.addEventListener("click", () => {
      void this.submitVerse(verse.id);
    });
    head.append(name, submit);
    card.appendChild(head);

    const row = el("div", "tokens");
    verse.tokens.forEach((token, index) => {
      row.appendChild(this.renderToken(verse.id, index, token.form, token.tag, token.changed));
    });
    card.appendChild(row);
    return card;
  }

  private async submitVerse(verseId: string): Promise<void> {
    try {
      await this.store.submitVerse(verseId);
    } catch {
      // rejected: card stays editable, edits preserved; lastError shows inline
    }
    this.render();
  }

  private renderToken(
    verseId: string,
    index: number,
    form: string,
    servedTag: string,
    changed: boolean
  ): HTMLElement {
    const shown = this.store.displayTag(verseId, index, servedTag);
    const edited = shown !== servedTag;
    const cell = el("span", "token" + (changed ? " changed" : "") + (edited ? " edited" : ""));
    cell.tabIndex = 0;
    cell.dataset.index = String(index);
    const word = el("span", "form");
    word.textContent = form;
    const tag = el("span", "tag");
    tag.textContent = shown;
    cell.append(word, tag);

    const target = this.pickerTarget;
    const isOpen =
      target !== null && target.verseId === verseId && target.index === index && target.state.open;
    if (isOpen && target) {
      cell.appendChild(this.renderPicker(target));
    }
    cell.addEventListener("click", () => {
      this.pickerTarget = { verseId, index, state: { ...initialPicker(), open: true } };
      this.render();
      this.focusToken(verseId, index);
    });
    cell.addEventListener("keydown", (event) => this.onTokenKeydown(event, verseId, index));
    return cell;
  }

  private renderPicker(target: PickerTarget): HTMLElement {
    const box = el("div", "picker");
    const query = el("div", "picker-query");
    query.textContent = target.state.query || "type to search";
    box.appendChild(query);
    const list = el("ul", "picker-options");
    const options = filterLabels(this.store.tagsetLabels, target.state.query);
    options.forEach((label, i) => {
      const item = el("li", i === target.state.active ? "active" : "");
      item.textContent = label;
      item.addEventListener("mousedown", (event) => {
        event.preventDefault();
        this.chooseLabel(target.verseId, target.index, label);
      });
      list.appendChild(item);
    });
    box.appendChild(list);
    return box;
  }

  private chooseLabel(verseId: string, index: number, label: string): void {
    this.store.setEdit(verseId, index, label);
    this.pickerTarget = null;
    this.render();
    this.focusToken(verseId, index);
  }

  private onTokenKeydown(event: KeyboardEvent, verseId: string, index: number): void {
    const target = this.pickerTarget;
    const pickerOpen =
      target !== null && target.verseId === verseId && target.index === index && target.state.open;

    if (!pickerOpen) {
      if (event.key === "Enter") {
        event.preventDefault();
        this.pickerTarget = { verseId, index, state: { ...initialPicker(), open: true } };
        this.render();
        this.focusToken(verseId, index);
      } else if (event.key === "ArrowRight" || event.key === "Tab") {
        event.preventDefault();
        this.focusToken(verseId, index + 1);
      } else if (event.key === "ArrowLeft") {
        event.preventDefault();
        this.focusToken(verseId, index - 1);
      }
      return;
    }

    event.preventDefault();
    const action = pickerKeydown(target!.state, this.store.tagsetLabels, event.key);
    if (action.kind === "select") {
      this.chooseLabel(verseId, index, action.label);
      this.focusToken(verseId, index + 1); // move on: correction speed matters
    } else if (action.kind === "close") {
      this.pickerTarget = null;
      this.render();
      this.focusToken(verseId, index);
    } else {
      this.render();
      this.focusToken(verseId, index);
    }
  }

  private focusToken(verseId: string, index: number): void {
    const card = this.root.querySelector(`[data-verse-id="${cssAttr(verseId)}"]`);
    const token = card?.querySelector(`[data-index="${index}"]`) as HTMLElement | null;
    token?.focus();
  }
}

function cssAttr(value: string): string {
  return value.replace(/\\/g, "\\\\").replace(/"/g, '\\"');
}

function el(tag: string, className = ""): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  return node;
}
