"""Per-session scores and benchmark aggregates.

Profits are money differences; normalized profits divide by |B - C| in
floats so MI and CI sessions are comparable. Aggregates cover ALL/MI/CI
scopes with SNP, deal rates, Share, and the average first-bid ratio, and
carry the accounting identity SNP_b + SNP_s = #MI deals - #CI deals over
valid records as a consistency check.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable

from .catalog import Scenario
from .money import Cents, parse_dollars
from .protocol import SessionRecord


def profits(budget: Cents, cost: Cents, deal_price: Cents) -> tuple[Cents, Cents]:
    return budget - deal_price, deal_price - cost


def rubinstein_utilities(
    budget: Cents, cost: Cents, deal_price: Cents
) -> tuple[float, float]:
    """Classic bargaining utilities (B-D)/(B-C), (D-C)/(B-C).

    Kept for completeness only: in CI sessions (B <= C) the sign flips
    against the profit, so aggregates use normalized profits instead.
    """
    if budget == cost:
        raise ZeroDivisionError("utilities undefined when budget equals cost")
    span = budget - cost
    return (budget - deal_price) / span, (deal_price - cost) / span


def normalized_profits(
    budget: Cents, cost: Cents, deal_price: Cents | None
) -> tuple[float, float]:
    """(NP_b, NP_s): profits divided by |B - C|; (0, 0) when no deal."""
    if deal_price is None:
        return 0.0, 0.0
    span = abs(budget - cost)
    return (budget - deal_price) / span, (deal_price - cost) / span


@dataclass(frozen=True)
class SessionScore:
    scenario: Scenario
    valid: bool
    dealt: bool
    np_b: float
    np_s: float
    profit_b: Cents | None = None
    profit_s: Cents | None = None
    fbr: float | None = None
    deal_price: Cents | None = None


def score_record(record: SessionRecord) -> SessionScore:
    cfg = record.config
    deal_price = record.deal_price if record.dealt else None
    np_b, np_s = normalized_profits(cfg.budget, cfg.cost, deal_price)
    p_b = p_s = None
    if deal_price is not None:
        p_b, p_s = profits(cfg.budget, cfg.cost, deal_price)
    first_bid = record.first_buyer_bid
    fbr = first_bid / cfg.budget if (record.valid and first_bid is not None) else None
    return SessionScore(
        scenario=cfg.scenario,
        valid=record.valid,
        dealt=record.dealt,
        np_b=np_b,
        np_s=np_s,
        profit_b=p_b,
        profit_s=p_s,
        fbr=fbr,
        deal_price=deal_price,
    )


def score_log_entry(entry: dict) -> SessionScore:
    """Score a parsed session-log line (see protocol.record_to_dict)."""
    budget = parse_dollars(entry["B"])
    cost = parse_dollars(entry["C"])
    valid = bool(entry["valid"])
    dealt = entry["status"] == "deal"
    deal_price = (
        parse_dollars(entry["deal_price"]) if entry.get("deal_price") else None
    )
    if not dealt:
        deal_price = None
    np_b, np_s = normalized_profits(budget, cost, deal_price)
    p_b = p_s = None
    if deal_price is not None:
        p_b, p_s = profits(budget, cost, deal_price)
    first_bid = (
        parse_dollars(entry["first_buyer_bid"]) if entry.get("first_buyer_bid") else None
    )
    fbr = first_bid / budget if (valid and first_bid is not None) else None
    return SessionScore(
        scenario=Scenario(entry["scenario"]),
        valid=valid,
        dealt=dealt,
        np_b=np_b,
        np_s=np_s,
        profit_b=p_b,
        profit_s=p_s,
        fbr=fbr,
        deal_price=deal_price,
    )


def first_bid_ratio(record: SessionRecord) -> float | None:
    first_bid = record.first_buyer_bid
    if first_bid is None:
        return None
    return first_bid / record.config.budget


@dataclass(frozen=True)
class ScopeStats:
    count: int
    deals: int
    snp_b: float
    snp_s: float

    @property
    def deal_rate(self) -> float | None:
        return self.deals / self.count if self.count else None


@dataclass(frozen=True)
class BenchmarkSummary:
    all: ScopeStats
    mi: ScopeStats
    ci: ScopeStats
    share_b: float | None
    share_s: float | None
    avg_fbr: float | None


def share(snp_b: float, snp_s: float) -> tuple[float, float] | None:
    """Buyer/seller split of the total profit on the table; None when <= 0."""
    total = snp_b + snp_s
    if total <= 0:
        return None
    return snp_b / total, snp_s / total


def aggregate(scores: Iterable[SessionScore]) -> BenchmarkSummary:
    """Fold scores into a summary; invalid sessions contribute nothing."""

    def fold(selected: list[SessionScore]) -> ScopeStats:
        return ScopeStats(
            count=len(selected),
            deals=sum(1 for s in selected if s.dealt),
            snp_b=sum(s.np_b for s in selected),
            snp_s=sum(s.np_s for s in selected),
        )

    valid = [s for s in scores if s.valid]
    stats_all = fold(valid)
    stats_mi = fold([s for s in valid if s.scenario is Scenario.MI])
    stats_ci = fold([s for s in valid if s.scenario is Scenario.CI])
    shares = share(stats_all.snp_b, stats_all.snp_s)
    fbrs = [s.fbr for s in valid if s.fbr is not None]
    return BenchmarkSummary(
        all=stats_all,
        mi=stats_mi,
        ci=stats_ci,
        share_b=shares[0] if shares else None,
        share_s=shares[1] if shares else None,
        avg_fbr=sum(fbrs) / len(fbrs) if fbrs else None,
    )


def identity_residual(scores: Iterable[SessionScore]) -> float:
    """(SNP_b + SNP_s) minus (#MI deals - #CI deals) over valid records."""
    snp_total = 0.0
    mi_deals = 0
    ci_deals = 0
    for s in scores:
        if not s.valid:
            continue
        snp_total += s.np_b + s.np_s
        if s.dealt:
            if s.scenario is Scenario.MI:
                mi_deals += 1
            else:
                ci_deals += 1
    return snp_total - (mi_deals - ci_deals)


SUMMARY_COLUMNS = [
    "role",
    "n_all",
    "avg_fbr",
    "snp",
    "share",
    "n_mi",
    "deal_rate_mi",
    "snp_mi",
    "n_ci",
    "deal_rate_ci",
    "snp_ci",
]


def _fmt(value: float | None, digits: int = 4) -> str:
    return "" if value is None else f"{value:.{digits}f}"


def summary_rows(summary: BenchmarkSummary) -> list[dict]:
    rows = []
    for role, snp_key, share_value in (
        ("buyer", "snp_b", summary.share_b),
        ("seller", "snp_s", summary.share_s),
    ):
        rows.append(
            {
                "role": role,
                "n_all": summary.all.count,
                "avg_fbr": _fmt(summary.avg_fbr) if role == "buyer" else "",
                "snp": f"{getattr(summary.all, snp_key):.4f}",
                "share": _fmt(share_value) if share_value is not None else "undef",
                "n_mi": summary.mi.count,
                "deal_rate_mi": _fmt(summary.mi.deal_rate),
                "snp_mi": f"{getattr(summary.mi, snp_key):.4f}",
                "n_ci": summary.ci.count,
                "deal_rate_ci": _fmt(summary.ci.deal_rate),
                "snp_ci": f"{getattr(summary.ci, snp_key):.4f}",
            }
        )
    return rows


def summary_csv(summary: BenchmarkSummary) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SUMMARY_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in summary_rows(summary):
        writer.writerow(row)
    return buf.getvalue()
