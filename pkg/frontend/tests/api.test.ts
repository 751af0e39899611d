import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError, type Score, type SessionView } from "../src/api.js";
import { buildActionString, ownNP, terminalBanner } from "../src/session.js";

const BASE = "http://test.local";

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

function openView(history: SessionView["observation"]["visible_history"]): SessionView {
  return {
    session_id: "s1",
    observation: {
      role: "buyer",
      product: {
        title: "Micro SD Card",
        description: "Fast.",
        codename: "electronics_203",
        list_price: "39.99",
      },
      private_value: "31.99",
      visible_history: history,
      turns_remaining: 9,
      max_turns: 10,
      quantity: 1,
    },
    status: "open",
    deal_price: null,
    your_turn: true,
  };
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("request plumbing", () => {
  it("posts the session creation payload", async () => {
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse(200, openView([])));
    vi.stubGlobal("fetch", fetchMock);
    const client = new ApiClient(BASE);
    await client.createSession("electronics_203", "buyer");
    expect(fetchMock).toHaveBeenCalledWith(
      `${BASE}/sessions`,
      expect.objectContaining({ method: "POST" }),
    );
    expect(JSON.parse(fetchMock.mock.calls[0][1].body)).toEqual({
      codename: "electronics_203",
      human_role: "buyer",
    });
  });

  it("surfaces the violation category on 422", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn().mockResolvedValue(
        jsonResponse(422, {
          detail: { category: "deal_mismatch", message: "echo the standing offer" },
        }),
      ),
    );
    const client = new ApiClient(BASE);
    const err = await client.submitTurn("s1", "", "[DEAL] $9 (1x electronics_203)").catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(422);
    expect(err.category).toBe("deal_mismatch");
  });

  it("plain-string details become the error message", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn().mockResolvedValue(jsonResponse(404, { detail: "unknown session" })),
    );
    const err = await new ApiClient(BASE).getSession("nope").catch((e) => e);
    expect(err.status).toBe(404);
    expect(err.message).toBe("unknown session");
  });

  it("network failure maps to status 0", async () => {
    vi.stubGlobal("fetch", vi.fn().mockRejectedValue(new TypeError("refused")));
    const err = await new ApiClient(BASE).getSession("s1").catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(0);
  });
});

describe("echo-rule flow end to end (mocked server)", () => {
  it("accepting a standing SELL shows the NP the score endpoint reports", async () => {
    const afterSell = openView([
      { role: "buyer", talk: "offer", action: "[BUY] $30 (1x electronics_203)" },
      { role: "seller", talk: "counter", action: "[SELL] $34.50 (1x electronics_203)" },
    ]);
    const score: Score = {
      scenario: "ci",
      valid: true,
      dealt: true,
      np_b: -0.14764705882352944,
      np_s: 1.1476470588235294,
      profit_b: "-2.51",
      profit_s: "19.51",
      deal_price: "34.50",
      fbr: 0.9378,
    };
    const terminal: SessionView = {
      ...afterSell,
      status: "deal",
      deal_price: "34.50",
      your_turn: false,
      score,
    };
    const fetchMock = vi
      .fn()
      .mockResolvedValueOnce(jsonResponse(200, terminal))
      .mockResolvedValueOnce(jsonResponse(200, score));
    vi.stubGlobal("fetch", fetchMock);

    const client = new ApiClient(BASE);
    // the form pre-fills DEAL from the standing offer; typed price is ignored
    const action = buildActionString(afterSell, "DEAL", "");
    expect(action).toBe("[DEAL] $34.50 (1x electronics_203)");

    const result = await client.submitTurn(afterSell.session_id, "deal!", action);
    expect(result.status).toBe("deal");
    const fetched = await client.getScore(afterSell.session_id);

    // what the banner renders must be exactly what GET /score reports
    expect(ownNP(result, result.score!)).toBe(fetched.np_b);
    expect(terminalBanner(result, result.score!)).toContain(fetched.np_b.toFixed(4));
    expect(fetchMock.mock.calls[1][0]).toBe(`${BASE}/sessions/s1/score`);
  });
});
