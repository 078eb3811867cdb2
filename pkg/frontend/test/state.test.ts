import { describe, expect, it } from "vitest";

import {
  applyExample, canProcess, edited, examplesFailed, examplesLoaded,
  exampleSwitchNeedsConfirm, initialState, processFailed, processFinished,
  processStarted,
} from "../src/state.js";

const EXAMPLES = [
  { name: "blocks", source: "sets block = [1,4];" },
  { name: "yale", source: "fluents alive;" },
];

describe("process lifecycle", () => {
  it("disables processing while busy", () => {
    let s = initialState();
    expect(canProcess(s)).toBe(true);
    s = processStarted(s);
    expect(canProcess(s)).toBe(false);
    s = processFinished(s, { output: "yes\n", exitCode: 0 });
    expect(canProcess(s)).toBe(true);
  });

  it("refuses a second in-flight request", () => {
    const s = processStarted(initialState());
    expect(() => processStarted(s)).toThrow(/in flight/);
  });

  it("shows the server output verbatim", () => {
    const output = "1)\ncarry(1):=2\nloc(1):=2\nfree(2):=false\n";
    const s = processFinished(processStarted(initialState()), {
      output,
      exitCode: 0,
    });
    expect(s.lastOutput).toBe(output);
    expect(s.exitCode).toBe(0);
  });

  it("renders http failures into the pane", () => {
    const s = processFailed(processStarted(initialState()), 413, "program too large");
    expect(s.busy).toBe(false);
    expect(s.lastOutput).toBe("HTTP 413: program too large");
    expect(s.exitCode).toBeNull();
  });
});

describe("examples", () => {
  it("stores loaded entries and clears the banner", () => {
    const s = examplesLoaded(initialState(), EXAMPLES);
    expect(s.examples).toHaveLength(2);
    expect(s.banner).toBeNull();
  });

  it("raises a banner when loading fails", () => {
    const s = examplesFailed(initialState());
    expect(s.banner).toBe("cannot load examples");
    expect(s.examples).toBeNull();
  });

  it("applies an example and resets dirtiness", () => {
    let s = examplesLoaded(initialState(), EXAMPLES);
    s = edited(s, "my edits");
    expect(exampleSwitchNeedsConfirm(s)).toBe(true);
    s = applyExample(s, "yale");
    expect(s.editorText).toBe("fluents alive;");
    expect(s.selectedExample).toBe("yale");
    expect(s.dirty).toBe(false);
    expect(exampleSwitchNeedsConfirm(s)).toBe(false);
  });

  it("needs no confirmation over a pristine editor", () => {
    const s = examplesLoaded(initialState(), EXAMPLES);
    expect(exampleSwitchNeedsConfirm(s)).toBe(false);
  });

  it("needs no confirmation when edits are whitespace only", () => {
    let s = examplesLoaded(initialState(), EXAMPLES);
    s = edited(s, "  \n");
    expect(exampleSwitchNeedsConfirm(s)).toBe(false);
  });

  it("ignores unknown example names", () => {
    const s = examplesLoaded(initialState(), EXAMPLES);
    expect(applyExample(s, "nope")).toBe(s);
  });
});

describe("editing", () => {
  it("marks the state dirty", () => {
    const s = edited(initialState(), "fluents f;");
    expect(s.dirty).toBe(true);
    expect(s.editorText).toBe("fluents f;");
  });

  it("is a no-op for identical text", () => {
    const s = initialState();
    expect(edited(s, "")).toBe(s);
  });
});
