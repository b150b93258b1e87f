import { describe, expect, it } from "vitest";

import { SequenceGate, WhatIfHistory } from "../src/history.js";

describe("SequenceGate", () => {
  it("hands out increasing sequence numbers", () => {
    const gate = new SequenceGate();
    expect(gate.begin()).toBe(1);
    expect(gate.begin()).toBe(2);
    expect(gate.begin()).toBe(3);
  });

  it("accepts responses arriving in order", () => {
    const gate = new SequenceGate();
    const a = gate.begin();
    const b = gate.begin();
    expect(gate.accept(a)).toBe(true);
    expect(gate.accept(b)).toBe(true);
  });

  it("discards a stale response that lost the race", () => {
    const gate = new SequenceGate();
    const first = gate.begin();
    const second = gate.begin();
    expect(gate.accept(second)).toBe(true); // newer one landed first
    expect(gate.accept(first)).toBe(false); // old response must be dropped
  });

  it("never applies the same response twice", () => {
    const gate = new SequenceGate();
    const seq = gate.begin();
    expect(gate.accept(seq)).toBe(true);
    expect(gate.accept(seq)).toBe(false);
  });
});

describe("WhatIfHistory", () => {
  it("appends rows in submission order", () => {
    const history = new WhatIfHistory();
    history.append({ seq: 1, inputs: ["148"], label: "1", probability: 0.84 });
    history.append({ seq: 2, inputs: ["100"], label: "0", probability: 0.61 });
    expect(history.list().map((r) => r.inputs[0])).toEqual(["148", "100"]);
  });

  it("keeps rows comparable: same input arity per form", () => {
    const history = new WhatIfHistory();
    history.append({ seq: 1, inputs: ["2", "148", "94"], label: "1", probability: 0.9 });
    history.append({ seq: 2, inputs: ["2", "100", "94"], label: "0", probability: 0.3 });
    const arities = new Set(history.list().map((r) => r.inputs.length));
    expect(arities.size).toBe(1);
  });

  it("clear empties the list", () => {
    const history = new WhatIfHistory();
    history.append({ seq: 1, inputs: ["x"], label: "0", probability: 0.5 });
    history.clear();
    expect(history.list()).toEqual([]);
  });
});
