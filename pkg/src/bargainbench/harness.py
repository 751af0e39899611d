"""Benchmark orchestration: agent specs, seeded concurrent runs, logs, reports."""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .agents import (
    Agent,
    EndpointConfig,
    HttpChatClient,
    LLMAgent,
    ReplayClient,
    ScriptedBuyer,
    ScriptedSeller,
)
from .catalog import (
    DEFAULT_BUDGET_FACTOR,
    DEFAULT_MAX_TURNS,
    DEFAULT_SIGMA_CENTS,
    Product,
    SessionConfig,
    configure_session,
)
from .metrics import (
    BenchmarkSummary,
    aggregate,
    score_log_entry,
    score_record,
    summary_csv,
)
from .og_narrator import LLMNarrator, OGBuyer, TemplateNarrator
from .protocol import Role, SessionRecord, record_line, run_session


@dataclass(frozen=True)
class AgentSpec:
    kind: str  # scripted_buyer | scripted_seller | llm | og_narrator
    params: dict = field(default_factory=dict)

    def create(self, role: Role, config: SessionConfig, seed: int) -> Agent:
        params = self.params
        if self.kind == "scripted_buyer":
            if role is not Role.BUYER:
                raise ValueError("scripted-buyer can only play the buyer")
            return ScriptedBuyer(
                open_ratio=float(params.get("r0", 0.5)),
                close_ratio=float(params.get("r1", 1.0)),
            )
        if self.kind == "scripted_seller":
            if role is not Role.SELLER:
                raise ValueError("scripted-seller can only play the seller")
            return ScriptedSeller(
                margin=float(params.get("m", 0.0)),
                open_ratio=float(params.get("s0", 1.0)),
            )
        if self.kind == "llm":
            return LLMAgent(role, config, self._client(params))
        if self.kind == "og_narrator":
            if role is not Role.BUYER:
                raise ValueError("og can only play the buyer")
            narrator_kind = params.get("narrator", "template")
            if narrator_kind == "llm":
                narrator = LLMNarrator(self._client(params))
            else:
                narrator = TemplateNarrator()
            return OGBuyer(
                narrator=narrator,
                floor_ratio=float(params.get("floor", 0.5)),
                ceiling_ratio=float(params.get("ceiling", 1.0)),
            )
        raise ValueError(f"unknown agent kind {self.kind!r}")

    def _client(self, params: dict):
        if "replay" in params:
            return ReplayClient(params["replay"])
        return HttpChatClient(
            EndpointConfig(
                base_url=params["base-url"],
                model=params["model"],
                api_key_env=params.get("api-key-env", "BARGAINBENCH_API_KEY"),
            )
        )


_SPEC_KINDS = {
    "scripted-buyer": "scripted_buyer",
    "scripted-seller": "scripted_seller",
    "llm": "llm",
    "og": "og_narrator",
}


def parse_agent_spec(text: str) -> AgentSpec:
    """Parse CLI agent specs like ``scripted-buyer:r0=0.5,r1=1.0``."""
    name, _, rest = text.partition(":")
    if name not in _SPEC_KINDS:
        raise ValueError(f"unknown agent spec {name!r}")
    params = {}
    if rest:
        for pair in rest.split(","):
            key, _, value = pair.partition("=")
            if not value:
                raise ValueError(f"bad agent parameter {pair!r}")
            params[key.strip()] = value.strip()
    return AgentSpec(_SPEC_KINDS[name], params)


def session_seed(run_seed: int, codename: str) -> int:
    """Stable per-session seed, independent of dispatch order."""
    digest = hashlib.sha256(f"{run_seed}:{codename}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass
class RunConfig:
    catalog: list[Product]
    buyer: AgentSpec
    seller: AgentSpec
    budget_factor: float = DEFAULT_BUDGET_FACTOR
    max_turns: int = DEFAULT_MAX_TURNS
    sigma: int = DEFAULT_SIGMA_CENTS
    seed: int = 0
    parallelism: int = 1
    repetitions: int = 1
    out_dir: Path | None = None
    resume: bool = False

    def __post_init__(self):
        if self.parallelism < 1:
            raise ValueError("parallelism must be at least 1")
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")


def _run_one(cfg: RunConfig, product: Product, rep: int) -> tuple[str, SessionRecord]:
    session_id = (
        product.codename if cfg.repetitions == 1 else f"{product.codename}#{rep}"
    )
    session_cfg = configure_session(
        product, cfg.budget_factor, cfg.max_turns, cfg.sigma
    )
    seed = session_seed(cfg.seed, session_id)
    buyer = cfg.buyer.create(Role.BUYER, session_cfg, seed)
    seller = cfg.seller.create(Role.SELLER, session_cfg, seed)
    return session_id, run_session(session_cfg, buyer, seller)


def _read_log_entries(path: Path) -> list[dict]:
    entries = []
    if not path.exists():
        return entries
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                entries.append(json.loads(line))
            except json.JSONDecodeError:
                break  # partially written trailing line; discard
    return entries


def run_benchmark(cfg: RunConfig) -> tuple[BenchmarkSummary, Path | None]:
    """Run one session per product (times repetitions) and aggregate.

    Sessions run concurrently up to the parallelism width but are logged in
    catalog order, so equal configs produce byte-identical logs at any width.
    """
    jobs = [
        (product, rep)
        for product in cfg.catalog
        for rep in range(1, cfg.repetitions + 1)
    ]

    log_path: Path | None = None
    done_entries: list[dict] = []
    if cfg.out_dir is not None:
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        log_path = cfg.out_dir / "sessions.jsonl"
        if cfg.resume:
            done_entries = _read_log_entries(log_path)
        elif log_path.exists():
            log_path.unlink()
    done_ids = {entry["session_id"] for entry in done_entries}
    pending = [
        (p, rep)
        for p, rep in jobs
        if (p.codename if cfg.repetitions == 1 else f"{p.codename}#{rep}")
        not in done_ids
    ]

    scores = [score_log_entry(entry) for entry in done_entries]
    if cfg.resume and log_path is not None and done_entries:
        # rewrite only complete lines, dropping any partial trailing write
        with open(log_path, "w", encoding="utf-8") as fh:
            for entry in done_entries:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")

    log_fh = open(log_path, "a", encoding="utf-8") if log_path is not None else None
    try:
        with ThreadPoolExecutor(max_workers=cfg.parallelism) as pool:
            futures = [pool.submit(_run_one, cfg, p, rep) for p, rep in pending]
            for future in futures:
                session_id, record = future.result()
                scores.append(score_record(record))
                if log_fh is not None:
                    log_fh.write(record_line(record, session_id) + "\n")
                    log_fh.flush()
    finally:
        if log_fh is not None:
            log_fh.close()

    summary = aggregate(scores)
    if cfg.out_dir is not None:
        (cfg.out_dir / "summary.csv").write_text(summary_csv(summary))
    return summary, log_path


def score_log(path: str | Path) -> BenchmarkSummary:
    """Recompute a summary from a session log."""
    return aggregate(score_log_entry(e) for e in _read_log_entries(Path(path)))


_REPORT_COLUMNS = [
    ("name", 24),
    ("role", 8),
    ("n_all", 7),
    ("avg_fbr", 9),
    ("snp", 12),
    ("share", 9),
    ("n_mi", 6),
    ("d_mi", 8),
    ("snp_mi", 12),
    ("n_ci", 6),
    ("d_ci", 8),
    ("snp_ci", 12),
]


def render_report(summaries: list[tuple[str, BenchmarkSummary]]) -> str:
    """Fixed-width report; rows sorted by ALL-scope SNP descending per role."""

    def fmt(value, width):
        if value is None:
            text = "undef"
        elif isinstance(value, float):
            text = f"{value:.4f}"
        else:
            text = str(value)
        return text.rjust(width)

    lines = [" ".join(name.rjust(width) for name, width in _REPORT_COLUMNS)]
    rows = []
    for name, summary in summaries:
        for role in ("buyer", "seller"):
            snp_all = summary.all.snp_b if role == "buyer" else summary.all.snp_s
            snp_mi = summary.mi.snp_b if role == "buyer" else summary.mi.snp_s
            snp_ci = summary.ci.snp_b if role == "buyer" else summary.ci.snp_s
            share_v = summary.share_b if role == "buyer" else summary.share_s
            rows.append(
                (
                    role,
                    snp_all,
                    [
                        name,
                        role,
                        summary.all.count,
                        summary.avg_fbr if role == "buyer" else "",
                        snp_all,
                        share_v,
                        summary.mi.count,
                        summary.mi.deal_rate,
                        snp_mi,
                        summary.ci.count,
                        summary.ci.deal_rate,
                        snp_ci,
                    ],
                )
            )
    rows.sort(key=lambda item: (item[0], -item[1]))
    for _, _, values in rows:
        lines.append(
            " ".join(
                fmt(value, width)
                for value, (_, width) in zip(values, _REPORT_COLUMNS)
            )
        )
    return "\n".join(lines) + "\n"
