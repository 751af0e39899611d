"""Agent contract, scripted oracle agents, prompt templates, and the LLM adapter.

Agents see only an :class:`Observation`: public product info, their own
private value, and the counterpart's transmitted Talk and Action. Thought
text and the counterpart's private value are never projected in.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from typing import Protocol

import httpx

from .catalog import SessionConfig
from .money import Cents, format_dollars, round_cents
from .protocol import (
    Action,
    ParseError,
    Role,
    SessionState,
    Turn,
    Verb,
    parse_turn,
    render_action,
)


@dataclass(frozen=True)
class ProductInfo:
    title: str
    description: str
    codename: str
    list_price: Cents


@dataclass(frozen=True)
class VisibleTurn:
    role: Role
    talk: str
    action: Action


@dataclass(frozen=True)
class Observation:
    role: Role
    product: ProductInfo
    private_value: Cents  # budget for the buyer, cost for the seller
    visible_history: tuple[VisibleTurn, ...]
    turns_remaining: int
    max_turns: int
    quantity: int

    def own_move_count(self) -> int:
        return sum(1 for t in self.visible_history if t.role is self.role)

    def standing_offer(self) -> Action | None:
        """Counterpart's most recent priced offer, if any."""
        wanted = Verb.SELL if self.role is Role.BUYER else Verb.BUY
        for turn in reversed(self.visible_history):
            if turn.role is not self.role and turn.action.verb is wanted:
                return turn.action
        return None


def observe(state: SessionState, role: Role) -> Observation:
    cfg = state.config
    return Observation(
        role=role,
        product=ProductInfo(
            title=cfg.product.title,
            description=cfg.product.description,
            codename=cfg.product.codename,
            list_price=cfg.list_price,
        ),
        private_value=cfg.budget if role is Role.BUYER else cfg.cost,
        visible_history=tuple(
            VisibleTurn(t.role, t.talk, t.action) for t in state.history
        ),
        turns_remaining=cfg.max_turns - state.turn_index,
        max_turns=cfg.max_turns,
        quantity=cfg.quantity,
    )


class AgentError(Exception):
    """Unrecoverable agent failure; the session is marked invalid."""

    def __init__(self, category: str, message: str = ""):
        super().__init__(message or category)
        self.category = category


class Agent(Protocol):
    def act(self, obs: Observation, feedback: str | None = None) -> Turn: ...


# ---------------------------------------------------------------------------
# Scripted agents (deterministic oracles)
# ---------------------------------------------------------------------------


@dataclass
class ScriptedBuyer:
    """Linear escalation from open_ratio*B to close_ratio*B over max_turns moves.

    Accepts any standing seller offer at or below the current target; quits
    on the final move if nothing acceptable is on the table.
    """

    open_ratio: float = 0.5
    close_ratio: float = 1.0

    def __post_init__(self):
        if not 0 < self.open_ratio <= 1:
            raise ValueError("open_ratio must be in (0, 1]")
        if not self.open_ratio <= self.close_ratio <= 1:
            raise ValueError("close_ratio must be in [open_ratio, 1]")

    def target_bid(self, k: int, max_turns: int, budget: Cents) -> Cents:
        if max_turns > 1:
            ratio = self.open_ratio + (self.close_ratio - self.open_ratio) * k / (
                max_turns - 1
            )
        else:
            ratio = self.open_ratio
        return round_cents(ratio * budget)

    def act(self, obs: Observation, feedback: str | None = None) -> Turn:
        k = obs.own_move_count()
        target = self.target_bid(k, obs.max_turns, obs.private_value)
        offer = obs.standing_offer()
        if offer is not None and offer.price <= target:
            action = Action(Verb.DEAL, offer.price, offer.quantity, offer.codename)
            talk = f"Deal at ${format_dollars(offer.price)} for {obs.quantity}x {obs.product.codename}."
        elif k >= obs.max_turns - 1 and k > 0:
            # k == 0 can't QUIT: the buyer's first action must be BUY or REJECT
            action = Action(Verb.QUIT)
            talk = "No acceptable offer; I'm walking away."
        else:
            action = Action(Verb.BUY, target, obs.quantity, obs.product.codename)
            talk = f"Offering ${format_dollars(target)} for {obs.quantity}x {obs.product.codename}."
        return Turn(Role.BUYER, thought="", talk=talk, action=action)


@dataclass
class ScriptedSeller:
    """Time-dependent conceder from open_ratio*L down to a reservation margin over cost."""

    margin: float = 0.0
    open_ratio: float = 1.0

    def __post_init__(self):
        if self.margin < 0:
            raise ValueError("margin must be nonnegative")
        if not 0 < self.open_ratio <= 1:
            raise ValueError("open_ratio must be in (0, 1]")

    def reservation(self, cost: Cents) -> Cents:
        return round_cents(cost * (1 + self.margin))

    def ask(self, k: int, max_turns: int, cost: Cents, list_price: Cents) -> Cents:
        schedule = round_cents(self.open_ratio * list_price * (1 - k / max_turns))
        return max(self.reservation(cost), schedule)

    def act(self, obs: Observation, feedback: str | None = None) -> Turn:
        cost = obs.private_value
        reservation = self.reservation(cost)
        if reservation > round_cents(self.open_ratio * obs.product.list_price):
            raise ValueError("reservation price exceeds the opening ask")
        k = obs.own_move_count()
        ask = self.ask(k, obs.max_turns, cost, obs.product.list_price)
        bid = obs.standing_offer()
        threshold = reservation if k >= obs.max_turns - 1 else ask
        if bid is not None and bid.price >= threshold:
            action = Action(Verb.DEAL, bid.price, bid.quantity, bid.codename)
            talk = f"Deal at ${format_dollars(bid.price)} for {obs.quantity}x {obs.product.codename}."
        else:
            action = Action(Verb.SELL, ask, obs.quantity, obs.product.codename)
            talk = f"Offering ${format_dollars(ask)} for {obs.quantity}x {obs.product.codename}."
        return Turn(Role.SELLER, thought="", talk=talk, action=action)


# ---------------------------------------------------------------------------
# Prompt templates
# ---------------------------------------------------------------------------

BUYER_SYSTEM_PROMPT = """You are a buyer looking forward to buying things on your Shopping List from me, the seller.
You have access to the seller's Inventory List and you can bargain about the prices.
Your task is to bargain with the seller and reach a deal with the price as low as possible in limited turns.
You can only buy things on the Shopping List in the limited quantity. Use the codename of the product instead of the title.
You can only buy things that cost less than your budget; otherwise, you should quit negotiating.

Your Reply should include 3 parts: Thought, Talk, and Action.
Thought: your inner strategic thinking of this bargaining session;
Talk: short talk that you are going to say to the seller. Speak concisely and cut to the chase. Generate authentic and diverse sentences, avoiding repetition of sentences that have already appeared in the conversation;
Action: one of the limited actions that define the real intention of your Talk. The type of your Action must be one of "[BUY],[REJECT],[DEAL],[QUIT]".
1. '[BUY] $M (N codename_1)' if you wish to offer the seller $M to purchase all N items of the product with the codename "codename_1".
2. '[REJECT]' if you choose to reject the other side's offer and await a new offer from the seller.
3. '[DEAL] $M (N codename_1)' if you finally accept a former offer proposed by the seller. $M (N codename_1) is an exact copy of the seller's previous offer. You should not use this action to propose a new price. This action will immediately end the conversation and close the deal.
4. '[QUIT]' if you believe that a mutually acceptable deal cannot be reached in limited turns. This action will immediately end the conversation.
You shouldn't choose action '[DEAL] $M' before seller's action '[SELL] $M'. Your first action should be '[BUY] $M (N codename_1)' or '[REJECT]'.
'[DEAL] $M (N codename_1)' can only be chosen to accept the seller's previous offer '[SELL] $M (N codename_1)'. Otherwise, you always choose from '[BUY]', '[REJECT]' and '[QUIT]'.

Your reply should strictly follow this format, for example:
Thought: I'm a buyer, and I want to bargain. The listing price of codename "apple_1" is $15, which is too expensive, so I try to buy an apple for $10.
Talk: Hello, I'm tight on budget. can you sell it for 10$?
Action: [BUY] $10 (1x apple_1)"""

BUYER_USER_TEMPLATE = """{inv}

Shopping List
{need}

Now, I play the role of seller and you play the role of buyer. We are going to negotiate based on the Inventory List in {max_turns} turns."""

SELLER_SYSTEM_PROMPT = """You are a seller looking forward to selling things on your Inventory List to me, the buyer.
Your task is to bargain with the buyer and reach a deal with the price as high as possible in limited turns.
You can only sell things that are on. the Inventory List. Use the codename of the product instead of the title.
You have access to private information: the cost price of each product in the Inventory List, and do not disclose the real cost to the buyer.
You should only agree on a deal when the selling price is higher than the cost; otherwise, you should quit negotiating.

Your Reply should include 3 parts: Thought, Talk, and Action.
Thought: your inner strategic thinking of this bargaining session;
Talk: short talk that you are going to say to the buyer. Speak concisely and cut to the chase. Generate authentic and diverse sentences, avoiding repetition of sentences that have already appeared in the conversation;
Action: one of the limited actions that define the real intention of your Talk. The type of your Action must be one of "[SELL],[REJECT],[DEAL],[QUIT]".
1. '[SELL] $M (N codename_1)' if you want to propose selling N items of the product with the codename "codename_1" to the buyer for the total price of $M.
2. '[REJECT]' if you choose to reject the other side's offer and await a new offer from the buyer.
3. '[DEAL] $M (N codename_1)' if you finally agree on a former offer proposed by the buyer and sell N items of the product with the codename "codename_1" to the buyer for the total price of $M. $M (N codename_1) is an exact copy of the buyer's previous offer. You should not use this action to propose a new price. This action will immediately end the conversation and close the deal.
4. '[QUIT]' if you believe that a mutually acceptable deal cannot be reached in limited turns. This action will immediately end the conversation.
You shouldn't choose action '[DEAL]' before buyer's action '[BUY]'.
'[DEAL] $M (N codename_1)' can only be chosen to accept the buyer's previous offer '[BUY] $M (N codename_1)'. Otherwise, you always choose from '[SELL]', '[REJECT]' and '[QUIT]'.

Your reply should strictly follow this format, for example:
Thought: I'm a seller, so I must sell the product with the codename "apple_1" higher than its cost.
Talk: blah, blah...
Action: [SELL] $15 (1x apple_1)"""

SELLER_USER_TEMPLATE = """{inv}

Now, I play the role of buyer and you play the role of seller. We are going to negotiate based on the Inventory List in {max_turns} turns."""


def _inventory_block(config: SessionConfig, include_cost: bool) -> str:
    p = config.product
    lines = [
        "Inventory List:",
        f"Product1 (codename: {p.codename})",
        f'Title: "{p.title}"',
        f'Description: "{p.description}"',
        f"Available Quantity: {config.quantity}",
        f"Listing Price: ${format_dollars(config.list_price)} per item",
    ]
    if include_cost:
        lines.append(f"Cost: ${format_dollars(config.cost)} per item")
    return "\n".join(lines)


def build_buyer_prompt(config: SessionConfig) -> tuple[str, str]:
    need = (
        f"{config.quantity}x {config.product.codename} "
        f"(your budget: ${format_dollars(config.budget)})"
    )
    user = BUYER_USER_TEMPLATE.format(
        inv=_inventory_block(config, include_cost=False),
        need=need,
        max_turns=config.max_turns,
    )
    return BUYER_SYSTEM_PROMPT, user


def build_seller_prompt(config: SessionConfig) -> tuple[str, str]:
    user = SELLER_USER_TEMPLATE.format(
        inv=_inventory_block(config, include_cost=True),
        max_turns=config.max_turns,
    )
    return SELLER_SYSTEM_PROMPT, user


# ---------------------------------------------------------------------------
# Chat endpoint clients
# ---------------------------------------------------------------------------


class TransportError(Exception):
    """Chat endpoint unreachable or returned a server error."""


@dataclass
class EndpointConfig:
    base_url: str
    model: str
    api_key_env: str = "BARGAINBENCH_API_KEY"
    timeout: float = 60.0
    max_transport_retries: int = 3
    backoff: float = 1.0


class HttpChatClient:
    """Minimal OpenAI-style chat-completions client with bounded retries."""

    def __init__(self, endpoint: EndpointConfig):
        self.endpoint = endpoint
        headers = {}
        api_key = os.environ.get(endpoint.api_key_env)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        self._client = httpx.Client(
            base_url=endpoint.base_url, headers=headers, timeout=endpoint.timeout
        )

    def complete(self, messages: list[dict]) -> str:
        payload = {
            "model": self.endpoint.model,
            "messages": messages,
            "temperature": 0,
        }
        last_error: Exception | None = None
        for attempt in range(self.endpoint.max_transport_retries):
            try:
                response = self._client.post("/chat/completions", json=payload)
                if response.status_code in (429, 500, 502, 503):
                    raise TransportError(f"HTTP {response.status_code}")
                response.raise_for_status()
                return response.json()["choices"][0]["message"]["content"]
            except (httpx.HTTPError, TransportError, KeyError) as exc:
                last_error = exc
                time.sleep(self.endpoint.backoff * (2**attempt))
        raise TransportError(f"chat endpoint failed: {last_error}")


class ReplayClient:
    """File-backed replay mock implementing the chat-client contract.

    The fixture maps a digest of the message list to a recorded completion;
    a plain list replays completions in order instead.
    """

    def __init__(self, fixture: str | list[str] | dict[str, str]):
        if isinstance(fixture, str):
            with open(fixture, encoding="utf-8") as fh:
                fixture = json.load(fh)
        self._by_digest: dict[str, str] = {}
        self._queue: list[str] = []
        if isinstance(fixture, dict):
            self._by_digest = dict(fixture)
        else:
            self._queue = list(fixture)
        self._cursor = 0
        self.requests: list[list[dict]] = []

    @staticmethod
    def digest(messages: list[dict]) -> str:
        import hashlib

        blob = json.dumps(messages, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def complete(self, messages: list[dict]) -> str:
        self.requests.append(messages)
        if self._by_digest:
            key = self.digest(messages)
            if key not in self._by_digest:
                raise TransportError(f"no recorded completion for digest {key}")
            return self._by_digest[key]
        if self._cursor >= len(self._queue):
            raise TransportError("replay fixture exhausted")
        content = self._queue[self._cursor]
        self._cursor += 1
        return content


PARSE_RETRY_BUDGET = 2


class LLMAgent:
    """Chat-endpoint agent producing Thought/Talk/Action turns.

    Own prior messages (including Thought) go back as assistant messages;
    counterpart history carries only Talk and Action, as user messages.
    """

    def __init__(self, role: Role, config: SessionConfig, client):
        self.role = role
        self.config = config
        self.client = client
        builder = build_buyer_prompt if role is Role.BUYER else build_seller_prompt
        self.system_prompt, self.user_prompt = builder(config)
        # Own Thought text never crosses the wire to the counterpart, but this
        # agent replays its own past thoughts into its assistant messages.
        self._own_thoughts: dict[int, str] = {}

    def _messages(self, obs: Observation, feedback: str | None) -> list[dict]:
        messages = [
            {"role": "system", "content": self.system_prompt},
            {"role": "user", "content": self.user_prompt},
        ]
        own_index = 0
        for turn in obs.visible_history:
            if turn.role is self.role:
                thought = self._own_thoughts.get(own_index, "")
                own_index += 1
                prefix = f"Thought: {thought}\n" if thought else ""
                messages.append(
                    {
                        "role": "assistant",
                        "content": (
                            f"{prefix}Talk: {turn.talk}\n"
                            f"Action: {render_action(turn.action)}"
                        ),
                    }
                )
            else:
                messages.append(
                    {
                        "role": "user",
                        "content": (
                            f"Talk: {turn.talk}\nAction: {render_action(turn.action)}"
                        ),
                    }
                )
        if feedback:
            messages.append({"role": "user", "content": feedback})
        return messages

    def act(self, obs: Observation, feedback: str | None = None) -> Turn:
        notice = feedback
        last_category = "no_action"
        for _attempt in range(1 + PARSE_RETRY_BUDGET):
            try:
                content = self.client.complete(self._messages(obs, notice))
            except TransportError as exc:
                raise AgentError("transport_error", str(exc)) from exc
            try:
                turn = parse_turn(content, self.role)
                self._own_thoughts[obs.own_move_count()] = turn.thought
                return turn
            except ParseError as exc:
                last_category = exc.category
                notice = (
                    f"Your last reply could not be parsed ({exc.category}). "
                    "Reply again with Thought, Talk, and Action lines and a "
                    "well-formed bracketed Action."
                )
        raise AgentError(last_category, "retry budget exhausted")
