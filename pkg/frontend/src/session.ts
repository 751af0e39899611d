// View-model logic for one live session: what the form may offer, what gets
// sent, and how the terminal banner reads. Pure functions, no DOM.

import {
  PRICED_VERBS,
  legalVerbs,
  parseAction,
  parsePriceInput,
  renderAction,
  renderPrice,
  type ParsedAction,
  type Verb,
} from "./actions.js";
import type { Score, SessionView } from "./api.js";

export class FormError extends Error {}

/** The counterpart's most recent priced offer, if any. */
export function standingOffer(view: SessionView): ParsedAction | null {
  const own = view.observation.role;
  for (let i = view.observation.visible_history.length - 1; i >= 0; i--) {
    const entry = view.observation.visible_history[i];
    if (entry.role === own) continue;
    const action = parseAction(entry.action);
    if (action && PRICED_VERBS.has(action.verb)) return action;
  }
  return null;
}

export function availableVerbs(view: SessionView): Verb[] {
  const obs = view.observation;
  const firstBuyerMove = obs.role === "buyer" && obs.visible_history.length === 0;
  return legalVerbs(obs.role, standingOffer(view) !== null, firstBuyerMove);
}

/** Exact echo price for the DEAL button, pre-filled from the standing offer. */
export function dealPrefill(view: SessionView): string | null {
  const offer = standingOffer(view);
  return offer && offer.price !== undefined ? renderPrice(offer.price) : null;
}

/**
 * Turn form input into the canonical action string, or throw FormError.
 * DEAL ignores the typed price entirely and echoes the standing offer.
 */
export function buildActionString(view: SessionView, verb: Verb, priceText: string): string {
  if (!availableVerbs(view).includes(verb)) {
    throw new FormError(`[${verb}] is not available right now`);
  }
  if (!PRICED_VERBS.has(verb)) return renderAction({ verb });
  const obs = view.observation;
  if (verb === "DEAL") {
    const offer = standingOffer(view);
    if (!offer) throw new FormError("nothing to accept yet");
    return renderAction({ ...offer, verb: "DEAL" });
  }
  const price = parsePriceInput(priceText);
  if (price === null) {
    throw new FormError("enter a price like 34.50");
  }
  return renderAction({
    verb,
    price,
    quantity: obs.quantity,
    codename: obs.product.codename,
  });
}

/** Own-side normalized profit from a score payload. */
export function ownNP(view: SessionView, score: Score): number {
  return view.observation.role === "buyer" ? score.np_b : score.np_s;
}

export function terminalBanner(view: SessionView, score: Score): string {
  const np = ownNP(view, score).toFixed(4);
  const own = view.observation.role;
  const profit = own === "buyer" ? score.profit_b : score.profit_s;
  switch (view.status) {
    case "deal":
      return `Deal at $${view.deal_price} — your profit $${profit}, normalized ${np}`;
    case "no_deal_quit":
      return `No deal: one side quit. Normalized profit ${np}`;
    case "no_deal_exhausted":
      return `No deal: ran out of turns. Normalized profit ${np}`;
    default:
      return `Session closed (${view.status}). Normalized profit ${np}`;
  }
}
