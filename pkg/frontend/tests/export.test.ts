import { describe, expect, it } from "vitest";
import { exportScript } from "../src/exportScript.js";

describe("script export", () => {
  it("renders inject and tick lines in batch syntax", () => {
    const text = exportScript([
      { kind: "inject", src: "env", dst: "switch1", event: "click", args: [] },
      { kind: "tick", ms: 1000 },
      { kind: "tick", ms: 250 },
      {
        kind: "inject", src: "t1", dst: "pm1", event: "connectSegment",
        args: [5, "entry", true],
      },
      {
        kind: "inject", src: "env", dst: "car1", event: "setHome",
        args: [{ ref: "terminal1" }, { ref: null }],
      },
    ]);
    expect(text).toBe(
      "inject env switch1.click;\n" +
      "tick 1s;\n" +
      "tick 250ms;\n" +
      'inject t1 pm1.connectSegment(5, "entry", true);\n' +
      "inject env car1.setHome(terminal1, null);\n");
  });

  it("exports an empty session as an empty script", () => {
    expect(exportScript([])).toBe("");
  });
});
