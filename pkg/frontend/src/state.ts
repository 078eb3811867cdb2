/** Playground state and its pure transitions.
 *
 * The invariants live here so they can be unit-tested without a DOM:
 * at most one in-flight process request, the output pane always shows
 * the server's output verbatim, and picking an example over unsaved
 * edits needs confirmation.
 */

import type { ExampleEntry, ProcessResult } from "./api.js";

export interface PlaygroundState {
  editorText: string;
  selectedExample: string | null;
  lastOutput: string;
  exitCode: number | null;
  busy: boolean;
  examples: ExampleEntry[] | null; // null until loaded
  banner: string | null;
  dirty: boolean; // edits since the last example was applied
}

export function initialState(): PlaygroundState {
  return {
    editorText: "",
    selectedExample: null,
    lastOutput: "",
    exitCode: null,
    busy: false,
    examples: null,
    banner: null,
    dirty: false,
  };
}

export function examplesLoaded(
  state: PlaygroundState,
  entries: ExampleEntry[],
): PlaygroundState {
  return { ...state, examples: entries, banner: null };
}

export function examplesFailed(state: PlaygroundState): PlaygroundState {
  return { ...state, examples: null, banner: "cannot load examples" };
}

export function edited(state: PlaygroundState, text: string): PlaygroundState {
  if (text === state.editorText) {
    return state;
  }
  return { ...state, editorText: text, dirty: true };
}

/** Selecting an example needs confirmation when there are edits. */
export function exampleSwitchNeedsConfirm(state: PlaygroundState): boolean {
  return state.dirty && state.editorText.trim() !== "";
}

export function applyExample(
  state: PlaygroundState,
  name: string,
): PlaygroundState {
  const entry = state.examples?.find((e) => e.name === name);
  if (!entry) {
    return state;
  }
  return {
    ...state,
    editorText: entry.source,
    selectedExample: name,
    dirty: false,
  };
}

export function canProcess(state: PlaygroundState): boolean {
  return !state.busy;
}

export function processStarted(state: PlaygroundState): PlaygroundState {
  if (state.busy) {
    throw new Error("process already in flight");
  }
  return { ...state, busy: true };
}

export function processFinished(
  state: PlaygroundState,
  result: ProcessResult,
): PlaygroundState {
  return {
    ...state,
    busy: false,
    lastOutput: result.output, // verbatim, no client-side reformatting
    exitCode: result.exitCode,
  };
}

export function processFailed(
  state: PlaygroundState,
  status: number,
  message: string,
): PlaygroundState {
  return {
    ...state,
    busy: false,
    lastOutput: `HTTP ${status}: ${message}`,
    exitCode: null,
  };
}
