"""Action grammar and the alternating-offers session state machine.

The grammar covers five bracketed verbs. BUY, SELL, and DEAL carry a price,
quantity, and codename payload; REJECT and QUIT are bare. The state machine
alternates buyer-first half-moves, enforces legality (role-verb binding,
first-action rule, exact DEAL echo), and records terminal outcomes.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import TYPE_CHECKING

from .catalog import SessionConfig
from .money import Cents, format_dollars, parse_dollars

if TYPE_CHECKING:
    from .agents import Agent


class Role(str, Enum):
    BUYER = "buyer"
    SELLER = "seller"

    @property
    def other(self) -> "Role":
        return Role.SELLER if self is Role.BUYER else Role.BUYER


class Verb(str, Enum):
    BUY = "BUY"
    SELL = "SELL"
    REJECT = "REJECT"
    DEAL = "DEAL"
    QUIT = "QUIT"


PRICED_VERBS = frozenset({Verb.BUY, Verb.SELL, Verb.DEAL})
BUYER_VERBS = frozenset({Verb.BUY, Verb.REJECT, Verb.DEAL, Verb.QUIT})
SELLER_VERBS = frozenset({Verb.SELL, Verb.REJECT, Verb.DEAL, Verb.QUIT})


@dataclass(frozen=True)
class Action:
    verb: Verb
    price: Cents | None = None
    quantity: int | None = None
    codename: str | None = None

    def __post_init__(self):
        if self.verb in PRICED_VERBS:
            if self.price is None or self.quantity is None or self.codename is None:
                raise ValueError(f"{self.verb.value} requires price, quantity, codename")
            if self.price <= 0 or self.quantity < 1:
                raise ValueError("price and quantity must be positive")
        elif self.price is not None or self.quantity is not None or self.codename is not None:
            raise ValueError(f"{self.verb.value} carries no payload")


class ParseError(Exception):
    """Action or turn text does not match the grammar."""

    def __init__(self, category: str, message: str):
        super().__init__(message)
        self.category = category


# Verbs are matched case-sensitively; payload tolerates surrounding whitespace.
_ACTION_RE = re.compile(
    r"\[(?P<verb>[A-Z]+)\]"
    r"(?:\s*\$(?P<price>\d{1,3}(?:,\d{3})*(?:\.\d{1,2})?|\d+(?:\.\d{1,2})?)"
    r"\s*\(\s*(?P<qty>\d+)\s*x\s*(?P<codename>[A-Za-z0-9_\-]+)\s*\))?"
)


def parse_action(text: str) -> Action:
    m = _ACTION_RE.search(text.strip())
    if m is None:
        raise ParseError("unknown_verb", f"no bracketed action found in {text!r}")
    verb_name = m.group("verb")
    try:
        verb = Verb(verb_name)
    except ValueError:
        raise ParseError("unknown_verb", f"unknown verb [{verb_name}]") from None
    if verb in PRICED_VERBS:
        if m.group("price") is None:
            raise ParseError("missing_price", f"[{verb.value}] requires a priced payload")
        try:
            price = parse_dollars(m.group("price"))
        except ValueError as exc:
            raise ParseError("malformed_payload", str(exc)) from exc
        quantity = int(m.group("qty"))
        if price <= 0 or quantity < 1:
            raise ParseError("malformed_payload", "price and quantity must be positive")
        return Action(verb, price, quantity, m.group("codename"))
    if m.group("price") is not None:
        raise ParseError("malformed_payload", f"[{verb.value}] carries no payload")
    return Action(verb)


def render_action(action: Action) -> str:
    if action.verb in PRICED_VERBS:
        return (
            f"[{action.verb.value}] ${format_dollars(action.price)}"
            f" ({action.quantity}x {action.codename})"
        )
    return f"[{action.verb.value}]"


@dataclass(frozen=True)
class Turn:
    role: Role
    thought: str
    talk: str
    action: Action
    raw: str | None = None


_LABEL_RE = re.compile(r"^[ \t]*(thought|talk|action)\s*:", re.IGNORECASE | re.MULTILINE)


def parse_turn(raw: str, role: Role) -> Turn:
    """Extract Thought/Talk/Action sections from a raw agent message.

    Labels are matched at line starts, case-insensitively; the last
    occurrence of each label wins. Missing Thought or Talk yield empty
    strings; a missing or unparseable Action is fatal.
    """
    labels = [(m.group(1).lower(), m.start(), m.end()) for m in _LABEL_RE.finditer(raw)]

    def section(name: str) -> str | None:
        picks = [(start, end) for lbl, start, end in labels if lbl == name]
        if not picks:
            return None
        start, end = picks[-1]
        following = [s for _, s, _ in labels if s > start]
        stop = min(following) if following else len(raw)
        return raw[end:stop].strip()

    action_text = section("action")
    if action_text is None:
        raise ParseError("no_action", "no Action label found")
    try:
        action = parse_action(action_text)
    except ParseError as exc:
        raise ParseError("no_action", f"unparseable action: {exc}") from exc
    return Turn(
        role=role,
        thought=section("thought") or "",
        talk=section("talk") or "",
        action=action,
        raw=raw,
    )


class Status(str, Enum):
    OPEN = "open"
    DEAL = "deal"
    NO_DEAL_QUIT = "no_deal_quit"
    NO_DEAL_EXHAUSTED = "no_deal_exhausted"
    INVALID = "invalid"


@dataclass
class SessionState:
    config: SessionConfig
    history: list[Turn] = field(default_factory=list)
    turn_index: int = 0  # completed buyer+seller rounds
    next_mover: Role = Role.BUYER
    status: Status = Status.OPEN
    deal_price: Cents | None = None
    quit_by: Role | None = None
    invalid_reason: str | None = None

    def standing_offer(self, against: Role) -> Action | None:
        """Most recent priced offer made by the counterpart of `against`."""
        offer_verb = Verb.SELL if against is Role.BUYER else Verb.BUY
        for turn in reversed(self.history):
            if turn.role is against.other and turn.action.verb is offer_verb:
                return turn.action
        return None


@dataclass(frozen=True)
class Violation:
    category: str
    message: str


def check_legality(state: SessionState, turn: Turn) -> Violation | None:
    if state.status is not Status.OPEN:
        return Violation("move_on_closed_session", "session is no longer open")
    if turn.role is not state.next_mover:
        return Violation("out_of_turn", f"it is the {state.next_mover.value}'s move")

    action = turn.action
    allowed = BUYER_VERBS if turn.role is Role.BUYER else SELLER_VERBS
    if action.verb not in allowed:
        return Violation(
            "wrong_verb_for_role",
            f"{turn.role.value} may not emit [{action.verb.value}]",
        )
    if turn.role is Role.BUYER and not state.history and action.verb not in (
        Verb.BUY,
        Verb.REJECT,
    ):
        return Violation("first_action", "buyer's first action must be [BUY] or [REJECT]")

    if action.verb in PRICED_VERBS:
        if action.quantity != state.config.quantity:
            return Violation(
                "bad_quantity", f"quantity must be {state.config.quantity}"
            )
        if action.codename != state.config.product.codename:
            return Violation(
                "bad_codename",
                f"codename must be {state.config.product.codename!r}",
            )

    if action.verb is Verb.DEAL:
        offer = state.standing_offer(turn.role)
        if offer is None:
            return Violation("premature_deal", "no counterpart offer to accept")
        if (action.price, action.quantity, action.codename) != (
            offer.price,
            offer.quantity,
            offer.codename,
        ):
            return Violation(
                "deal_mismatch",
                f"DEAL must exactly echo {render_action(offer)}",
            )
    return None


def advance(state: SessionState, turn: Turn) -> SessionState:
    """Apply a legal turn, closing the session on DEAL/QUIT/turn exhaustion."""
    if state.status is not Status.OPEN:
        raise ValueError("move_on_closed_session")
    state.history.append(turn)
    verb = turn.action.verb
    if verb is Verb.DEAL:
        state.status = Status.DEAL
        state.deal_price = turn.action.price
        return state
    if verb is Verb.QUIT:
        state.status = Status.NO_DEAL_QUIT
        state.quit_by = turn.role
        return state
    state.next_mover = turn.role.other
    if turn.role is Role.SELLER:
        state.turn_index += 1
        if state.turn_index >= state.config.max_turns:
            state.status = Status.NO_DEAL_EXHAUSTED
    return state


@dataclass(frozen=True)
class SessionRecord:
    config: SessionConfig
    history: tuple[Turn, ...]
    status: Status
    deal_price: Cents | None
    valid: bool
    quit_by: Role | None = None
    invalid_reason: str | None = None

    @property
    def dealt(self) -> bool:
        return self.status is Status.DEAL

    @property
    def first_buyer_bid(self) -> Cents | None:
        for turn in self.history:
            if turn.role is Role.BUYER and turn.action.verb is Verb.BUY:
                return turn.action.price
        return None


TERMINAL_VALID = frozenset({Status.DEAL, Status.NO_DEAL_QUIT, Status.NO_DEAL_EXHAUSTED})


def _finalize(state: SessionState) -> SessionRecord:
    return SessionRecord(
        config=state.config,
        history=tuple(state.history),
        status=state.status,
        deal_price=state.deal_price,
        valid=state.status in TERMINAL_VALID,
        quit_by=state.quit_by,
        invalid_reason=state.invalid_reason,
    )


RETRY_BUDGET = 2  # re-prompts per half-move after the first attempt


def run_session(
    config: SessionConfig, buyer: "Agent", seller: "Agent"
) -> SessionRecord:
    """Run one full session between two agents under the alternating protocol.

    Agent failures (unparseable output or legality violations surviving the
    retry budget) mark the record invalid; they never raise.
    """
    from .agents import AgentError, observe

    agents = {Role.BUYER: buyer, Role.SELLER: seller}
    state = SessionState(config=config)
    while state.status is Status.OPEN:
        role = state.next_mover
        obs = observe(state, role)
        feedback: str | None = None
        for _attempt in range(1 + RETRY_BUDGET):
            try:
                turn = agents[role].act(obs, feedback)
            except AgentError as exc:
                state.status = Status.INVALID
                state.invalid_reason = exc.category
                break
            violation = check_legality(state, turn)
            if violation is None:
                advance(state, turn)
                break
            feedback = (
                f"Your last action was illegal ({violation.category}): "
                f"{violation.message} Please reply again in the required format."
            )
        else:
            state.status = Status.INVALID
            state.invalid_reason = violation.category
    return _finalize(state)


def replay_record(record: SessionRecord) -> SessionState:
    """Re-drive a record's half-moves through legality checks and advance.

    Raises if any recorded move is illegal; used as a self-consistency check.
    """
    state = SessionState(config=record.config)
    for turn in record.history:
        violation = check_legality(state, turn)
        if violation is not None:
            raise ValueError(f"recorded move illegal: {violation.category}")
        advance(state, turn)
    return state


def record_to_dict(record: SessionRecord, session_id: str) -> dict:
    """Session-log line schema (one JSON object per session)."""
    cfg = record.config
    return {
        "session_id": session_id,
        "codename": cfg.product.codename,
        "B": format_dollars(cfg.budget),
        "C": format_dollars(cfg.cost),
        "L": format_dollars(cfg.list_price),
        "f": cfg.budget_factor,
        "t_m": cfg.max_turns,
        "scenario": cfg.scenario.value,
        "status": record.status.value,
        "deal_price": (
            format_dollars(record.deal_price) if record.deal_price is not None else None
        ),
        "valid": record.valid,
        "first_buyer_bid": (
            format_dollars(record.first_buyer_bid)
            if record.first_buyer_bid is not None
            else None
        ),
        "quit_by": record.quit_by.value if record.quit_by else None,
        "invalid_reason": record.invalid_reason,
        "history": [
            {
                "role": t.role.value,
                "thought": t.thought,
                "talk": t.talk,
                "action": render_action(t.action),
                "raw": t.raw,
            }
            for t in record.history
        ],
    }


def record_line(record: SessionRecord, session_id: str) -> str:
    return json.dumps(record_to_dict(record, session_id), sort_keys=True)
