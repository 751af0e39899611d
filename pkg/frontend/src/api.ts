// Typed client for the harness HTTP API.

import type { RoleName } from "./actions.js";

export interface ProductCard {
  title: string;
  description: string;
  codename: string;
  list_price: string;
}

export interface HistoryEntry {
  role: RoleName;
  talk: string;
  action: string;
}

export interface Observation {
  role: RoleName;
  product: ProductCard;
  private_value: string;
  visible_history: HistoryEntry[];
  turns_remaining: number;
  max_turns: number;
  quantity: number;
}

export interface Score {
  scenario: "mi" | "ci";
  valid: boolean;
  dealt: boolean;
  np_b: number;
  np_s: number;
  profit_b: string | null;
  profit_s: string | null;
  deal_price: string | null;
  fbr: number | null;
}

export interface SessionView {
  session_id: string;
  observation: Observation;
  status: string;
  deal_price: string | null;
  your_turn: boolean;
  score?: Score;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
    readonly category?: string,
  ) {
    super(message);
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(base + path, init);
  } catch (err) {
    throw new ApiError(0, `cannot reach ${base}: ${err}`);
  }
  const body = await response.json().catch(() => ({}));
  if (!response.ok) {
    const detail = (body as { detail?: unknown }).detail;
    if (detail && typeof detail === "object") {
      const d = detail as { category?: string; message?: string };
      throw new ApiError(response.status, d.message ?? "request failed", d.category);
    }
    throw new ApiError(response.status, String(detail ?? "request failed"));
  }
  return body as T;
}

function post(payload: unknown): RequestInit {
  return {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(payload),
  };
}

export class ApiClient {
  constructor(readonly base: string) {}

  createSession(codename: string, humanRole: RoleName, agent?: string): Promise<SessionView> {
    const payload: Record<string, string> = { codename, human_role: humanRole };
    if (agent) payload.agent = agent;
    return request<SessionView>(this.base, "/sessions", post(payload));
  }

  getSession(sessionId: string): Promise<SessionView> {
    return request<SessionView>(this.base, `/sessions/${sessionId}`);
  }

  submitTurn(sessionId: string, talk: string, action: string): Promise<SessionView> {
    return request<SessionView>(this.base, `/sessions/${sessionId}/turn`, post({ talk, action }));
  }

  getScore(sessionId: string): Promise<Score> {
    return request<Score>(this.base, `/sessions/${sessionId}/score`);
  }
}
