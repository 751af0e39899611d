"""Buyer enhancement: deterministic offer generator plus a pluggable narrator.

The generator escalates the buyer's offer linearly from half the budget up
to the full budget and accepts any seller offer at or below the current
target. The narrator only phrases the already-fixed action as Talk; its
output can never change the transmitted action.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

from .money import Cents, format_dollars, round_cents
from .protocol import Action, Role, Turn, Verb, render_action
from .agents import Observation, TransportError

DEFAULT_FLOOR_RATIO = 0.5
DEFAULT_CEILING_RATIO = 1.0


def offer_price(
    t: int,
    max_turns: int,
    budget: Cents,
    floor_ratio: float = DEFAULT_FLOOR_RATIO,
    ceiling_ratio: float = DEFAULT_CEILING_RATIO,
) -> Cents:
    """Price of the buyer's t-th offer on the linear escalation schedule."""
    if max_turns < 1:
        raise ValueError("max_turns must be at least 1")
    if not 0 <= t <= max_turns:
        raise ValueError("t must be in [0, max_turns]")
    ratio = floor_ratio + (ceiling_ratio - floor_ratio) * t / max_turns
    return round_cents(ratio * budget)


def og_decide(standing_seller_offer: Action | None, price: Cents, quantity: int, codename: str) -> Action:
    """Accept the standing offer when it is at or below the generated price."""
    if standing_seller_offer is not None and standing_seller_offer.price <= price:
        offer = standing_seller_offer
        return Action(Verb.DEAL, offer.price, offer.quantity, offer.codename)
    return Action(Verb.BUY, price, quantity, codename)


class Narrator(Protocol):
    def narrate(self, obs: Observation, action: Action) -> str: ...


class TemplateNarrator:
    """Deterministic one-line narration; keeps transcripts byte-stable."""

    def narrate(self, obs: Observation, action: Action) -> str:
        codename = obs.product.codename
        if action.verb is Verb.BUY:
            return f"I can offer ${format_dollars(action.price)} for {action.quantity}x {codename}."
        if action.verb is Verb.DEAL:
            return f"Deal, ${format_dollars(action.price)} for {action.quantity}x {codename}."
        return "Let's keep negotiating."


NARRATOR_SYSTEM_PROMPT = """You are good at business negotiating. You can fully understand the meaning of the Actions.
Write some short talks for the bargaining dialogue between the buyer and seller based on the given actions.
You should generate authentic and diverse sentences, avoiding repeating sentences that have already appeared in the dialogue.
Speak concisely and cut to the chase. The talks must align with the intention of the corresponding Action.

Action: one of the limited actions that define your actual intention. The type of an Action must be one of "[BUY],[SELL],[REJECT],[DEAL],[QUIT]".
1. '[BUY] $M (N codename_1)' if you wish to offer the seller $M to purchase N items of the product with the codename "codename_1".
2. '[SELL] $M (N codename_1)' if you want to propose selling N items of the product with the codename "codename_1" to the buyer for $M or you propose a new discounted offer $M for N codename_1 to the buyer.
3. '[REJECT]' if you choose to reject the other side's offer and await a new offer from the seller.
4. '[DEAL] $M (N codename_1)' if you finally agree on a former offer proposed by the seller to exchange N items of the product with the codename "codename_1" for $M. Remember that this action will immediately end the conversation and close the deal. You should ensure both sides agree on this price.
5. '[QUIT]' if you believe that a mutually acceptable deal cannot be reached. This action will immediately end the conversation.

Given Dialogue, Final Role, and Final Action, generate the corresponding sentences for the Final Role and Final Action.
Utilize the information from the Inventory List. Don't involve products that are not in the actions. Focus on the specific product in the Final Action.

Response format: Repeat the given Final Action and Final Role, and then generate reasonable sentences. For example:

Final Role: "BUYER"
Final Action: "[REJECT]"
Sentences: "I can't afford that price." """

NARRATOR_DEMO_USER = """Inventory List:
Product1 (codename: charger_1)
Title: "Verizon Car Charger with Dual Output Micro USB and LED Light"
Description: "Charge two devices simultaneously on the go. This vehicle charger with an additional USB port delivers enough power to charge two devices at once. The push-button activated LED connector light means no more fumbling in the dark trying to connect your device. Auto Detect IC Technology automatically detects the device type and its specific charging needs for improved compatibility. And the built-in indicator light illuminates red to let you know the charger is receiving power and the power socket is working properly."
Available Quantity: 1
Listing Price: $10 per item

Dialogue:
"[BUY] $5 (1 charger)": "BUYER: Hi, not sure if the charger would work for my car. Can you sell it to me for $5?",
"[SELL] $8 (1 charger)": "SELLER: I think the lowest I would want to go is 8. ",
"[BUY] $6 (1 charger)": "BUYER: How about $6 and I pick it up myself? It'll save you shipping to me.",
"[SELL] $7 (1 charger)": "SELLER: At least $7.",

Final Role: "BUYER"
Final Action: "[DEAL] $7 (1 charger)\""""

NARRATOR_DEMO_ASSISTANT = """Final Role: "BUYER"
Final Action: "[DEAL] $7 (1 charger)"
Sentences: "Eh, fine. Deal, $7, here you are.\""""


def build_narrator_messages(obs: Observation, action: Action) -> list[dict]:
    dialogue_lines = [
        f'"{render_action(t.action)}": "{t.role.value.upper()}: {t.talk}",'
        for t in obs.visible_history
    ]
    live = "\n".join(
        [
            "Inventory List:",
            f"Product1 (codename: {obs.product.codename})",
            f'Title: "{obs.product.title}"',
            f'Description: "{obs.product.description}"',
            f"Available Quantity: {obs.quantity}",
            f"Listing Price: ${format_dollars(obs.product.list_price)} per item",
            "",
            "Dialogue:",
            *dialogue_lines,
            "",
            f'Final Role: "{obs.role.value.upper()}"',
            f'Final Action: "{render_action(action)}"',
        ]
    )
    return [
        {"role": "system", "content": NARRATOR_SYSTEM_PROMPT},
        {"role": "user", "content": NARRATOR_DEMO_USER},
        {"role": "assistant", "content": NARRATOR_DEMO_ASSISTANT},
        {"role": "user", "content": live},
    ]


def extract_sentences(completion: str) -> str | None:
    for line in completion.splitlines():
        stripped = line.strip()
        if stripped.lower().startswith("sentences:"):
            text = stripped[len("sentences:"):].strip()
            return text.strip('"')
    return None


class LLMNarrator:
    """Phrases an action via a chat endpoint; falls back to the template on failure."""

    def __init__(self, client):
        self.client = client
        self._fallback = TemplateNarrator()

    def narrate(self, obs: Observation, action: Action) -> str:
        try:
            completion = self.client.complete(build_narrator_messages(obs, action))
        except TransportError:
            return self._fallback.narrate(obs, action)
        sentences = extract_sentences(completion)
        if sentences is None:
            return self._fallback.narrate(obs, action)
        return sentences


@dataclass
class OGBuyer:
    """Offer-generator buyer: the schedule dictates every action.

    The move index counts the buyer's own moves (0-indexed), so the first
    bid is exactly the floor ratio times the budget. The generator never
    emits QUIT; failed sessions end by exhaustion or the seller's action.
    """

    narrator: Narrator = field(default_factory=TemplateNarrator)
    floor_ratio: float = DEFAULT_FLOOR_RATIO
    ceiling_ratio: float = DEFAULT_CEILING_RATIO

    def __post_init__(self):
        if not 0 < self.floor_ratio <= self.ceiling_ratio <= 1:
            raise ValueError("require 0 < floor_ratio <= ceiling_ratio <= 1")

    def act(self, obs: Observation, feedback: str | None = None) -> Turn:
        t = obs.own_move_count()
        price = offer_price(
            t, obs.max_turns, obs.private_value, self.floor_ratio, self.ceiling_ratio
        )
        action = og_decide(
            obs.standing_offer(), price, obs.quantity, obs.product.codename
        )
        talk = self.narrator.narrate(obs, action)
        return Turn(Role.BUYER, thought="", talk=talk, action=action)
