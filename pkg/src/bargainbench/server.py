"""HTTP API for live human-vs-agent sessions (used by the web console)."""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .agents import Agent, AgentError, Observation, observe
from .catalog import (
    DEFAULT_BUDGET_FACTOR,
    DEFAULT_MAX_TURNS,
    DEFAULT_SIGMA_CENTS,
    Product,
    configure_session,
)
from .harness import AgentSpec, parse_agent_spec, session_seed
from .metrics import score_record
from .money import format_dollars
from .protocol import (
    ParseError,
    Role,
    SessionState,
    Status,
    Turn,
    advance,
    check_legality,
    parse_action,
    render_action,
    SessionRecord,
    TERMINAL_VALID,
)

DEFAULT_IDLE_TIMEOUT = 3600.0


class CreateSessionRequest(BaseModel):
    codename: str
    human_role: str
    agent: str | None = None


class TurnRequest(BaseModel):
    talk: str = ""
    action: str


@dataclass
class LiveSession:
    session_id: str
    state: SessionState
    machine: Agent
    human_role: Role
    created: float
    last_access: float = 0.0
    machine_failure: str | None = None


def _observation_json(obs: Observation) -> dict:
    return {
        "role": obs.role.value,
        "product": {
            "title": obs.product.title,
            "description": obs.product.description,
            "codename": obs.product.codename,
            "list_price": format_dollars(obs.product.list_price),
        },
        "private_value": format_dollars(obs.private_value),
        "visible_history": [
            {"role": t.role.value, "talk": t.talk, "action": render_action(t.action)}
            for t in obs.visible_history
        ],
        "turns_remaining": obs.turns_remaining,
        "max_turns": obs.max_turns,
        "quantity": obs.quantity,
    }


def _state_json(live: LiveSession) -> dict:
    state = live.state
    return {
        "session_id": live.session_id,
        "observation": _observation_json(observe(state, live.human_role)),
        "status": state.status.value,
        "deal_price": (
            format_dollars(state.deal_price) if state.deal_price is not None else None
        ),
        "your_turn": state.status is Status.OPEN
        and state.next_mover is live.human_role,
    }


def _to_record(live: LiveSession) -> SessionRecord:
    state = live.state
    return SessionRecord(
        config=state.config,
        history=tuple(state.history),
        status=state.status,
        deal_price=state.deal_price,
        valid=state.status in TERMINAL_VALID,
        quit_by=state.quit_by,
        invalid_reason=state.invalid_reason,
    )


def create_app(
    catalog: list[Product],
    budget_factor: float = DEFAULT_BUDGET_FACTOR,
    max_turns: int = DEFAULT_MAX_TURNS,
    sigma: int = DEFAULT_SIGMA_CENTS,
    default_agent: str = "scripted-seller:m=0.0,s0=1.0",
    seed: int = 0,
    idle_timeout: float = DEFAULT_IDLE_TIMEOUT,
) -> FastAPI:
    app = FastAPI(title="bargainbench")
    products = {p.codename: p for p in catalog}
    sessions: dict[str, LiveSession] = {}
    lock = threading.Lock()

    def _machine_moves(live: LiveSession) -> None:
        """Advance machine half-moves until it is the human's turn or terminal."""
        state = live.state
        while state.status is Status.OPEN and state.next_mover is not live.human_role:
            role = state.next_mover
            obs = observe(state, role)
            feedback = None
            for _attempt in range(3):
                try:
                    turn = live.machine.act(obs, feedback)
                except AgentError as exc:
                    state.status = Status.INVALID
                    state.invalid_reason = exc.category
                    return
                violation = check_legality(state, turn)
                if violation is None:
                    advance(state, turn)
                    break
                feedback = f"Illegal action ({violation.category}): {violation.message}"
            else:
                state.status = Status.INVALID
                state.invalid_reason = violation.category

    def _purge_idle() -> None:
        now = time.monotonic()
        stale = [
            sid
            for sid, live in sessions.items()
            if now - live.last_access > idle_timeout
        ]
        for sid in stale:
            del sessions[sid]

    def _get(session_id: str) -> LiveSession:
        live = sessions.get(session_id)
        if live is None:
            raise HTTPException(status_code=404, detail="unknown session")
        live.last_access = time.monotonic()
        return live

    @app.post("/sessions")
    def create_session(request: CreateSessionRequest) -> dict:
        product = products.get(request.codename)
        if request.codename == "random" and catalog:
            product = catalog[0]
        if product is None:
            raise HTTPException(status_code=404, detail="unknown codename")
        try:
            human_role = Role(request.human_role)
        except ValueError:
            raise HTTPException(status_code=422, detail="human_role must be buyer or seller")
        spec_text = request.agent
        if spec_text is None:
            spec_text = (
                default_agent
                if human_role is Role.BUYER
                else "scripted-buyer:r0=0.5,r1=1.0"
            )
        try:
            spec = parse_agent_spec(spec_text)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        config = configure_session(product, budget_factor, max_turns, sigma)
        session_id = uuid.uuid4().hex
        machine = spec.create(human_role.other, config, session_seed(seed, session_id))
        live = LiveSession(
            session_id=session_id,
            state=SessionState(config=config),
            machine=machine,
            human_role=human_role,
            created=time.monotonic(),
            last_access=time.monotonic(),
        )
        with lock:
            _purge_idle()
            _machine_moves(live)
            sessions[session_id] = live
        return _state_json(live)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        with lock:
            return _state_json(_get(session_id))

    @app.post("/sessions/{session_id}/turn")
    def post_turn(session_id: str, request: TurnRequest) -> dict:
        with lock:
            live = _get(session_id)
            state = live.state
            if state.status is not Status.OPEN:
                raise HTTPException(status_code=409, detail="session is closed")
            if state.next_mover is not live.human_role:
                raise HTTPException(status_code=409, detail="not your turn")
            try:
                action = parse_action(request.action)
            except ParseError as exc:
                raise HTTPException(
                    status_code=422, detail={"category": exc.category, "message": str(exc)}
                )
            turn = Turn(live.human_role, thought="", talk=request.talk, action=action)
            violation = check_legality(state, turn)
            if violation is not None:
                raise HTTPException(
                    status_code=422,
                    detail={"category": violation.category, "message": violation.message},
                )
            advance(state, turn)
            _machine_moves(live)
            response = _state_json(live)
            if state.status is not Status.OPEN:
                response["score"] = _score_json(live)
            return response

    def _score_json(live: LiveSession) -> dict:
        score = score_record(_to_record(live))
        return {
            "scenario": score.scenario.value,
            "valid": score.valid,
            "dealt": score.dealt,
            "np_b": score.np_b,
            "np_s": score.np_s,
            "profit_b": (
                format_dollars(score.profit_b) if score.profit_b is not None else None
            ),
            "profit_s": (
                format_dollars(score.profit_s) if score.profit_s is not None else None
            ),
            "deal_price": (
                format_dollars(score.deal_price)
                if score.deal_price is not None
                else None
            ),
            "fbr": score.fbr,
        }

    @app.get("/sessions/{session_id}/score")
    def get_score(session_id: str) -> dict:
        with lock:
            live = _get(session_id)
            if live.state.status is Status.OPEN:
                raise HTTPException(status_code=409, detail="session still open")
            return _score_json(live)

    return app
