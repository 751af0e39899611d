import { describe, expect, it } from "vitest";

import {
  legalVerbs,
  parseAction,
  parsePriceInput,
  renderAction,
  renderPrice,
  type ParsedAction,
  type Verb,
} from "../src/actions.js";

describe("price parsing", () => {
  it("accepts plain dollars", () => {
    expect(parsePriceInput("30")).toBe(3000);
  });

  it("accepts cents and a leading $", () => {
    expect(parsePriceInput("$34.50")).toBe(3450);
  });

  it("accepts thousands commas", () => {
    expect(parsePriceInput("1,081.16")).toBe(108116);
  });

  it("rejects garbage, negatives and zero", () => {
    for (const bad of ["", "abc", "-5", "1.234", "0", "0.00"]) {
      expect(parsePriceInput(bad)).toBeNull();
    }
  });
});

describe("price rendering", () => {
  it("drops .00", () => {
    expect(renderPrice(3000)).toBe("30");
  });

  it("keeps two decimals otherwise", () => {
    expect(renderPrice(3450)).toBe("34.50");
    expect(renderPrice(3401)).toBe("34.01");
  });

  it("rejects non-positive cents", () => {
    expect(() => renderPrice(0)).toThrow();
  });
});

describe("action round trip", () => {
  it("canonical examples", () => {
    expect(renderAction({ verb: "BUY", price: 3000, quantity: 1, codename: "electronics_203" }))
      .toBe("[BUY] $30 (1x electronics_203)");
    expect(renderAction({ verb: "REJECT" })).toBe("[REJECT]");
    expect(parseAction("[SELL] $34.50 (1x electronics_203)")).toEqual({
      verb: "SELL",
      price: 3450,
      quantity: 1,
      codename: "electronics_203",
    });
  });

  it("rejects malformed strings", () => {
    for (const bad of [
      "[HAGGLE] $10 (1x a_1)",
      "[buy] $10 (1x a_1)",
      "[DEAL]",
      "[REJECT] $10 (1x a_1)",
      "hello",
    ]) {
      expect(parseAction(bad)).toBeNull();
    }
  });

  it("every rendered action parses back (fuzz)", () => {
    const verbs: Verb[] = ["BUY", "SELL", "DEAL", "REJECT", "QUIT"];
    let state = 123456789;
    const rand = (n: number) => {
      state = (state * 1103515245 + 12345) % 2147483648;
      return state % n;
    };
    for (let i = 0; i < 2000; i++) {
      const verb = verbs[rand(verbs.length)];
      let action: ParsedAction;
      if (verb === "REJECT" || verb === "QUIT") {
        action = { verb };
      } else {
        action = {
          verb,
          price: rand(1_000_000) + 1,
          quantity: rand(99) + 1,
          codename: `cat-${rand(10)}_${rand(999) + 1}`,
        };
      }
      expect(parseAction(renderAction(action))).toEqual(action);
    }
  });
});

describe("verb availability", () => {
  it("buyer's first move is bid or reject only", () => {
    expect(legalVerbs("buyer", false, true)).toEqual(["BUY", "REJECT"]);
  });

  it("deal needs a standing offer", () => {
    expect(legalVerbs("buyer", false, false)).toEqual(["BUY", "REJECT", "QUIT"]);
    expect(legalVerbs("buyer", true, false)).toEqual(["BUY", "DEAL", "REJECT", "QUIT"]);
  });

  it("seller never bids", () => {
    expect(legalVerbs("seller", true, false)).toEqual(["SELL", "DEAL", "REJECT", "QUIT"]);
  });
});
