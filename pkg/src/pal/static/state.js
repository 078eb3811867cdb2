/** Playground state and its pure transitions.
 *
 * The invariants live here so they can be unit-tested without a DOM:
 * at most one in-flight process request, the output pane always shows
 * the server's output verbatim, and picking an example over unsaved
 * edits needs confirmation.
 */
export function initialState() {
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
export function examplesLoaded(state, entries) {
    return { ...state, examples: entries, banner: null };
}
export function examplesFailed(state) {
    return { ...state, examples: null, banner: "cannot load examples" };
}
export function edited(state, text) {
    if (text === state.editorText) {
        return state;
    }
    return { ...state, editorText: text, dirty: true };
}
/** Selecting an example needs confirmation when there are edits. */
export function exampleSwitchNeedsConfirm(state) {
    return state.dirty && state.editorText.trim() !== "";
}
export function applyExample(state, name) {
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
export function canProcess(state) {
    return !state.busy;
}
export function processStarted(state) {
    if (state.busy) {
        throw new Error("process already in flight");
    }
    return { ...state, busy: true };
}
export function processFinished(state, result) {
    return {
        ...state,
        busy: false,
        lastOutput: result.output, // verbatim, no client-side reformatting
        exitCode: result.exitCode,
    };
}
export function processFailed(state, status, message) {
    return {
        ...state,
        busy: false,
        lastOutput: `HTTP ${status}: ${message}`,
        exitCode: null,
    };
}
