/** DOM wiring: one static page driven by the pure state module. */
import { ApiError, fetchExamples, processProgram } from "./api.js";
import { applyExample, canProcess, edited, examplesFailed, examplesLoaded, exampleSwitchNeedsConfirm, initialState, processFailed, processFinished, processStarted, } from "./state.js";
export function createApp(root, base = "", confirmFn = (msg) => window.confirm(msg)) {
    const el = {
        picker: root.getElementById("example-picker"),
        editor: root.getElementById("editor"),
        process: root.getElementById("process"),
        output: root.getElementById("output"),
        badge: root.getElementById("badge"),
        banner: root.getElementById("banner"),
    };
    let state = initialState();
    function render() {
        el.process.disabled = !canProcess(state);
        el.output.textContent = state.lastOutput;
        if (state.exitCode === null) {
            el.badge.textContent = "";
            el.badge.className = "badge";
        }
        else {
            el.badge.textContent = `exit ${state.exitCode}`;
            el.badge.className = state.exitCode === 0 ? "badge ok" : "badge bad";
        }
        el.banner.textContent = state.banner ?? "";
        el.banner.hidden = state.banner === null;
        if (el.editor.value !== state.editorText) {
            el.editor.value = state.editorText;
        }
        renderPicker();
    }
    function renderPicker() {
        const entries = state.examples;
        el.picker.innerHTML = "";
        const placeholder = root.createElement("option");
        placeholder.value = "";
        placeholder.textContent =
            entries !== null && entries.length === 0 ? "(no examples)" : "examples…";
        el.picker.appendChild(placeholder);
        for (const entry of entries ?? []) {
            const option = root.createElement("option");
            option.value = entry.name;
            option.textContent = entry.name;
            option.selected = entry.name === state.selectedExample;
            el.picker.appendChild(option);
        }
    }
    async function loadExamples() {
        try {
            state = examplesLoaded(state, await fetchExamples(base));
        }
        catch {
            state = examplesFailed(state);
        }
        render();
    }
    function pickExample(name) {
        if (!name) {
            return;
        }
        if (exampleSwitchNeedsConfirm(state) &&
            !confirmFn("Replace your edits with the selected example?")) {
            render(); // snap the picker back
            return;
        }
        state = applyExample(state, name);
        render();
    }
    async function process() {
        if (!canProcess(state)) {
            return;
        }
        state = processStarted(state);
        render();
        try {
            state = processFinished(state, await processProgram(base, el.editor.value));
        }
        catch (err) {
            if (err instanceof ApiError) {
                state = processFailed(state, err.status, err.message);
            }
            else {
                state = processFailed(state, 0, String(err));
            }
        }
        render();
    }
    el.editor.addEventListener("input", () => {
        state = edited(state, el.editor.value);
    });
    el.picker.addEventListener("change", () => pickExample(el.picker.value));
    el.process.addEventListener("click", () => {
        void process();
    });
    render();
    void loadExamples();
    return {
        getState: () => state,
        process,
        pickExample,
        loadExamples,
    };
}
