import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api";
import { parseMetricsCsv } from "../src/chart";
import { App } from "../src/components";
import { filterLabels, initialPicker, pickerKeydown } from "../src/picker";
import { AppStore } from "../src/store";
import { LiveService, startService } from "./service_helper";

let service: LiveService;

beforeAll(async () => {
  service = await startService();
}, 60000);

afterAll(() => {
  service?.stop();
});

async function until(cond: () => boolean, what: string, ms = 20000): Promise<void> {
  const end = Date.now() + ms;
  while (Date.now() < end) {
    if (cond()) return;
    await new Promise((r) => setTimeout(r, 25));
  }
  throw new Error(`timed out waiting for ${what}`);
}

function mountApp(): { store: AppStore; app: App } {
  document.body.innerHTML = '<div id="app"></div>';
  const store = new AppStore(new ApiClient(service.base));
  const app = new App(store, document.getElementById("app")!);
  return { store, app };
}

describe("S1: round-trip against the live service", () => {
  it("loads the slice, takes two edits, submits, iterates, and charts the new point", async () => {
    const { store, app } = mountApp();
    await app.start();
    expect(store.state!.iteration).toBe(0);

    const cards = document.querySelectorAll(".verse-card");
    expect(cards.length).toBeGreaterThan(0);

    const pointsBefore = parseMetricsCsv(store.metricsCsv);
    expect(pointsBefore.accuracy.length).toBe(1);

    // edit two tags through the picker UI on the first card
    const firstCard = cards[0] as HTMLElement;
    const verseId = firstCard.dataset.verseId!;
    const label = store.tagsetLabels[0];
    for (const index of [0, 1]) {
      const token = document.querySelector(
        `[data-verse-id="${verseId}"] [data-index="${index}"]`
      ) as HTMLElement;
      token.dispatchEvent(new MouseEvent("click", { bubbles: true }));
      const option = [...document.querySelectorAll(".picker-options li")].find(
        (li) => li.textContent === label
      ) as HTMLElement;
      expect(option).toBeTruthy();
      option.dispatchEvent(new MouseEvent("mousedown", { bubbles: true }));
    }
    expect(store.editsFor(verseId)).toEqual([
      [0, label],
      [1, label],
    ]);

    // submit every verse (the edited one plus tacit acceptance of the rest)
    while (true) {
      const submit = document.querySelector(".verse-card button.submit") as HTMLElement | null;
      if (!submit) break;
      const card = submit.closest(".verse-card") as HTMLElement;
      const id = card.dataset.verseId!;
      submit.dispatchEvent(new MouseEvent("click", { bubbles: true }));
      await until(() => store.doneVerses.has(id), `verse ${id} acknowledged`);
      app.render();
    }
    expect(store.allCorrected).toBe(true);

    // the served gold for the edited verse carries the two overrides
    const storedGold = await fetch(`${service.base}/api/state`).then((r) => r.json());
    expect(storedGold.corrected_count).toBe(storedGold.selected_count);

    const iterate = document.getElementById("iterate") as HTMLButtonElement;
    expect(iterate.disabled).toBe(false);
    iterate.dispatchEvent(new MouseEvent("click", { bubbles: true }));
    await until(() => store.state!.iteration === 1, "iteration to finish", 30000);

    // chart gained exactly one point per series, byte-equal to metrics.csv
    const csv = await fetch(`${service.base}/api/metrics.csv`).then((r) => r.text());
    expect(store.metricsCsv).toBe(csv);
    const points = parseMetricsCsv(store.metricsCsv);
    expect(points.accuracy.length).toBe(2);
    expect(points.transformation.length).toBe(2);
    const rows = csv.trim().split("\n").slice(1);
    const header = csv.trim().split("\n")[0].split(",");
    const accCol = header.indexOf("accuracy");
    const rateCol = header.indexOf("transformation_rate");
    points.accuracy.forEach((point, i) => {
      expect(point.raw).toBe(rows[i].split(",")[accCol]);
    });
    points.transformation.forEach((point, i) => {
      expect(point.raw).toBe(rows[i].split(",")[rateCol]);
    });

    // the chart SVG re-rendered with both series present
    const svg = document.querySelector("#chart svg")!;
    expect(svg.querySelectorAll("polyline").length).toBe(2);
  }, 90000);
});

describe("S2: picker safety and conflict handling", () => {
  it("offers exactly the served tagset labels", async () => {
    const { store, app } = mountApp();
    await app.start();
    const tagsetDoc = await fetch(`${service.base}/api/tagset`).then((r) => r.json());
    const served = tagsetDoc.entries.map((e: [string, string]) => e[0]);
    expect(store.tagsetLabels).toEqual(served);

    const token = document.querySelector(".verse-card .token") as HTMLElement;
    token.dispatchEvent(new MouseEvent("click", { bubbles: true }));
    const offered = [...document.querySelectorAll(".picker-options li")].map(
      (li) => li.textContent
    );
    expect(offered).toEqual(served);

    // labels outside the tagset are not even settable client-side
    const verseId = (document.querySelector(".verse-card") as HTMLElement).dataset.verseId!;
    expect(() => store.setEdit(verseId, 0, "NOT_A_TAG")).toThrow(/tagset/);
  }, 60000);

  it("preserves local edits across a conflict response", async () => {
    const { store, app } = mountApp();
    await app.start();
    const verses = store.pendingVerses();
    expect(verses.length).toBeGreaterThan(0);
    const verseId = verses[0].id;
    const label = store.tagsetLabels[1];
    store.setEdit(verseId, 0, label);

    // another client corrects the same verse first -> our submit conflicts
    const other = new ApiClient(service.base);
    await other.postCorrections(verseId, []);

    await expect(store.submitVerse(verseId)).rejects.toSatisfy(
      (err: unknown) => err instanceof ApiError && err.isConflict
    );
    expect(store.lastError).toMatch(/corrected|pending/);
    expect(store.editsFor(verseId)).toEqual([[0, label]]);
    expect(store.doneVerses.has(verseId)).toBe(false);

    app.render();
    const banner = document.querySelector(".inline-error");
    expect(banner?.textContent).toBe(store.lastError);
    const card = document.querySelector(`[data-verse-id="${verseId}"]`);
    expect(card).toBeTruthy();
    expect(card!.querySelector(".token.edited")).toBeTruthy();
  }, 60000);

  it("local edits survive a slice re-fetch", async () => {
    const { store, app } = mountApp();
    await app.start();
    const verses = store.pendingVerses();
    const verseId = verses[verses.length - 1].id;
    const label = store.tagsetLabels[2];
    store.setEdit(verseId, 0, label);
    await store.loadSlice();
    expect(store.editsFor(verseId)).toEqual([[0, label]]);
    app.render();
    const card = document.querySelector(`[data-verse-id="${verseId}"]`);
    if (card) {
      expect(card.querySelector(".token.edited")).toBeTruthy();
    }
  }, 60000);
});

describe("picker logic", () => {
  const labels = ["NNC", "NNM", "NNP", "VrV", "VSI", "PREP"];

  it("prefix search narrows, substring is the fallback", () => {
    expect(filterLabels(labels, "")).toEqual(labels);
    expect(filterLabels(labels, "nn")).toEqual(["NNC", "NNM", "NNP"]);
    expect(filterLabels(labels, "v")).toEqual(["VrV", "VSI"]);
    expect(filterLabels(labels, "rep")).toEqual(["PREP"]);
    expect(filterLabels(labels, "zz")).toEqual([]);
  });

  it("keyboard flow: type, arrows, enter selects", () => {
    const state = { ...initialPicker(), open: true };
    expect(pickerKeydown(state, labels, "n").kind).toBe("none");
    expect(pickerKeydown(state, labels, "n").kind).toBe("none");
    expect(state.query).toBe("nn");
    pickerKeydown(state, labels, "ArrowDown");
    expect(state.active).toBe(1);
    const action = pickerKeydown(state, labels, "Enter");
    expect(action).toEqual({ kind: "select", label: "NNM" });
    expect(state.open).toBe(false);
  });

  it("escape closes without selecting", () => {
    const state = { ...initialPicker(), open: true, query: "v" };
    expect(pickerKeydown(state, labels, "Escape").kind).toBe("close");
  });
});

describe("chart parsing", () => {
  it("keeps raw CSV fields verbatim", () => {
    const csv =
      "state,accuracy,error_rate,transformation_rate,token_total,correct_count,in_target_count\n" +
      "IgbTC-0,0.0613,0.9387,0.0867,10000,613,867\n" +
      "IgbTC-1,0.6592,0.3408,0.9049,10000,6592,9049\n";
    const data = parseMetricsCsv(csv);
    expect(data.accuracy.map((p) => p.raw)).toEqual(["0.0613", "0.6592"]);
    expect(data.transformation.map((p) => p.raw)).toEqual(["0.0867", "0.9049"]);
    expect(data.accuracy.map((p) => p.state)).toEqual(["IgbTC-0", "IgbTC-1"]);
  });
});
