/** Tag picker logic: prefix search over the served tagset, keyboard-first. */

export function filterLabels(labels: string[], query: string): string[] {
  if (!query) return labels;
  const q = query.toLowerCase();
  const prefixed = labels.filter((label) => label.toLowerCase().startsWith(q));
  // fall back to substring matches so a mid-label fragment still finds its tag
  if (prefixed.length > 0) return prefixed;
  return labels.filter((label) => label.toLowerCase().includes(q));
}

export interface PickerState {
  open: boolean;
  query: string;
  active: number;
}

export function initialPicker(): PickerState {
  return { open: false, query: "", active: 0 };
}

export type PickerAction =
  | { kind: "select"; label: string }
  | { kind: "close" }
  | { kind: "none" };

/** Reduce a keydown into picker state + an action for the host component. */
export function pickerKeydown(
  state: PickerState,
  labels: string[],
  key: string
): PickerAction {
  const options = filterLabels(labels, state.query);
  if (key === "Escape") {
    state.open = false;
    state.query = "";
    state.active = 0;
    return { kind: "close" };
  }
  if (key === "ArrowDown") {
    state.active = options.length ? (state.active + 1) % options.length : 0;
    return { kind: "none" };
  }
  if (key === "ArrowUp") {
    state.active = options.length ? (state.active - 1 + options.length) % options.length : 0;
    return { kind: "none" };
  }
  if (key === "Enter") {
    if (options.length > 0) {
      const label = options[Math.min(state.active, options.length - 1)];
      state.open = false;
      state.query = "";
      state.active = 0;
      return { kind: "select", label };
    }
    return { kind: "none" };
  }
  if (key === "Backspace") {
    state.query = state.query.slice(0, -1);
    state.active = 0;
    return { kind: "none" };
  }
  if (key.length === 1 && key !== " ") {
    state.query += key;
    state.active = 0;
    return { kind: "none" };
  }
  return { kind: "none" };
}
