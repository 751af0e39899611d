// Client-side mirror of the server's action grammar. The server remains the
// authority; this module exists so the form can only ever emit canonical,
// parseable strings.

export type Verb = "BUY" | "SELL" | "REJECT" | "DEAL" | "QUIT";
export type RoleName = "buyer" | "seller";

export const PRICED_VERBS: ReadonlySet<Verb> = new Set(["BUY", "SELL", "DEAL"]);

export interface ParsedAction {
  verb: Verb;
  /** integer cents; present only for priced verbs */
  price?: number;
  quantity?: number;
  codename?: string;
}

const ACTION_RE =
  /^\[(BUY|SELL|REJECT|DEAL|QUIT)\](?: \$(\d{1,3}(?:,\d{3})*(?:\.\d{1,2})?|\d+(?:\.\d{1,2})?) \((\d+)x ([A-Za-z0-9_-]+)\))?$/;

/** Parse a canonical action string; returns null for anything malformed. */
export function parseAction(text: string): ParsedAction | null {
  const m = ACTION_RE.exec(text.trim());
  if (!m) return null;
  const verb = m[1] as Verb;
  if (PRICED_VERBS.has(verb)) {
    if (m[2] === undefined) return null;
    const price = parsePriceInput(m[2]);
    if (price === null) return null;
    return { verb, price, quantity: Number(m[3]), codename: m[4] };
  }
  if (m[2] !== undefined) return null;
  return { verb };
}

/** Dollars-and-cents text (with optional $ and commas) to integer cents. */
export function parsePriceInput(text: string): number | null {
  const cleaned = text.trim().replace(/^\$/, "").replace(/,/g, "");
  const m = /^(\d+)(?:\.(\d{1,2}))?$/.exec(cleaned);
  if (!m) return null;
  const cents = Number(m[1]) * 100 + Number((m[2] ?? "").padEnd(2, "0") || "0");
  return cents > 0 ? cents : null;
}

/** Integer cents to canonical display text: whole dollars drop the decimals. */
export function renderPrice(cents: number): string {
  if (!Number.isInteger(cents) || cents <= 0) {
    throw new Error(`bad price in cents: ${cents}`);
  }
  const dollars = Math.floor(cents / 100);
  const rem = cents % 100;
  return rem === 0 ? String(dollars) : `${dollars}.${String(rem).padStart(2, "0")}`;
}

export function renderAction(action: ParsedAction): string {
  if (PRICED_VERBS.has(action.verb)) {
    if (
      action.price === undefined ||
      action.quantity === undefined ||
      action.codename === undefined
    ) {
      throw new Error(`[${action.verb}] requires price, quantity and codename`);
    }
    return `[${action.verb}] $${renderPrice(action.price)} (${action.quantity}x ${action.codename})`;
  }
  return `[${action.verb}]`;
}

/**
 * Which verbs the form may offer right now. DEAL appears only once the
 * counterpart has a standing priced offer to echo, and the buyer's very
 * first move is restricted to an opening bid or a rejection.
 */
export function legalVerbs(
  role: RoleName,
  hasStandingOffer: boolean,
  isFirstBuyerMove: boolean,
): Verb[] {
  if (role === "buyer" && isFirstBuyerMove) return ["BUY", "REJECT"];
  const verbs: Verb[] = role === "buyer" ? ["BUY"] : ["SELL"];
  if (hasStandingOffer) verbs.push("DEAL");
  verbs.push("REJECT", "QUIT");
  return verbs;
}
