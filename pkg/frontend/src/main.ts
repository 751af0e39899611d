import { PRICED_VERBS, type RoleName, type Verb } from "./actions.js";
import { ApiClient, ApiError, type SessionView } from "./api.js";
import {
  FormError,
  availableVerbs,
  buildActionString,
  dealPrefill,
  terminalBanner,
} from "./session.js";

const api = new ApiClient(
  new URLSearchParams(location.search).get("api") ?? "http://127.0.0.1:8000",
);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const startForm = el<HTMLFormElement>("start-form");
const codenameInput = el<HTMLInputElement>("codename");
const roleSelect = el<HTMLSelectElement>("role");
const errorBox = el<HTMLDivElement>("error");
const board = el<HTMLDivElement>("board");
const productBox = el<HTMLDivElement>("product");
const ledger = el<HTMLUListElement>("ledger");
const turnForm = el<HTMLFormElement>("turn-form");
const verbBox = el<HTMLDivElement>("verbs");
const priceInput = el<HTMLInputElement>("price");
const talkInput = el<HTMLTextAreaElement>("talk");
const banner = el<HTMLDivElement>("banner");

let view: SessionView | null = null;
let selectedVerb: Verb | null = null;

function showError(message: string) {
  errorBox.textContent = message;
  errorBox.hidden = message === "";
}

function renderVerbs(current: SessionView) {
  verbBox.replaceChildren();
  for (const verb of availableVerbs(current)) {
    const button = document.createElement("button");
    button.type = "button";
    button.textContent = `[${verb}]`;
    button.className = verb === selectedVerb ? "verb selected" : "verb";
    button.addEventListener("click", () => {
      selectedVerb = verb;
      if (verb === "DEAL") {
        priceInput.value = dealPrefill(current) ?? "";
        priceInput.readOnly = true;
      } else {
        priceInput.readOnly = false;
        if (!PRICED_VERBS.has(verb)) priceInput.value = "";
      }
      priceInput.disabled = !PRICED_VERBS.has(verb);
      renderVerbs(current);
    });
    verbBox.append(button);
  }
}

function render(current: SessionView) {
  view = current;
  board.hidden = false;
  const obs = current.observation;
  const valueLabel = obs.role === "buyer" ? "budget" : "cost";
  productBox.textContent =
    `${obs.product.title} — list price $${obs.product.list_price} — ` +
    `your ${valueLabel} $${obs.private_value} — ` +
    `${obs.turns_remaining} of ${obs.max_turns} turns left`;

  ledger.replaceChildren();
  for (const entry of obs.visible_history) {
    const item = document.createElement("li");
    item.textContent = `${entry.role}: ${entry.talk} ${entry.action}`;
    ledger.append(item);
  }

  if (current.status !== "open") {
    turnForm.hidden = true;
    if (current.score) banner.textContent = terminalBanner(current, current.score);
    banner.hidden = false;
    return;
  }
  banner.hidden = true;
  turnForm.hidden = !current.your_turn;
  if (current.your_turn) {
    selectedVerb = null;
    priceInput.value = "";
    priceInput.disabled = false;
    priceInput.readOnly = false;
    renderVerbs(current);
  }
}

startForm.addEventListener("submit", async (event) => {
  event.preventDefault();
  showError("");
  try {
    render(
      await api.createSession(
        codenameInput.value.trim() || "random",
        roleSelect.value as RoleName,
      ),
    );
  } catch (err) {
    showError(err instanceof ApiError ? err.message : String(err));
  }
});

turnForm.addEventListener("submit", async (event) => {
  event.preventDefault();
  if (!view) return;
  showError("");
  if (!selectedVerb) {
    showError("pick an action first");
    return;
  }
  let action: string;
  try {
    action = buildActionString(view, selectedVerb, priceInput.value);
  } catch (err) {
    showError(err instanceof FormError ? err.message : String(err));
    return;
  }
  try {
    const next = await api.submitTurn(view.session_id, talkInput.value, action);
    talkInput.value = "";
    render(next);
  } catch (err) {
    if (err instanceof ApiError && err.status === 409) {
      // stale turn or closed session: re-sync with the server
      render(await api.getSession(view.session_id));
      return;
    }
    showError(err instanceof ApiError ? `${err.category ?? err.status}: ${err.message}` : String(err));
  }
});
