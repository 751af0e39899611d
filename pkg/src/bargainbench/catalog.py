"""Product catalog loading and per-product session configuration.

A catalog file is a JSON array of product records with historical price
extremes. Each product gets a codename (``<category-slug>_<n>``) and can be
turned into a frozen :class:`SessionConfig` via the budget factor.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum
from pathlib import Path

from .money import Cents, cents, round_cents

DEFAULT_BUDGET_FACTOR = 0.8
DEFAULT_MAX_TURNS = 10
DEFAULT_SIGMA_CENTS = 1  # one cent

_REQUIRED_FIELDS = ("title", "highest_price", "lowest_price", "category")


class Scenario(str, Enum):
    MI = "MI"  # mutual interest: B > C
    CI = "CI"  # conflicting interest: B <= C


class CatalogError(Exception):
    """Raised when a catalog file is missing fields or violates price order."""


@dataclass(frozen=True)
class Product:
    title: str
    description: str
    category: str
    highest_price: Cents
    lowest_price: Cents
    codename: str
    features: tuple[str, ...] = ()
    current_price: Cents | None = None
    image_url: str | None = None

    def __post_init__(self):
        if self.lowest_price > self.highest_price:
            raise CatalogError(
                f"{self.codename or self.title}: lowest_price exceeds highest_price"
            )


@dataclass(frozen=True)
class SessionConfig:
    """Frozen game parameters for one session."""

    product: Product
    list_price: Cents
    cost: Cents
    budget: Cents
    budget_factor: float
    max_turns: int
    sigma: Cents
    scenario: Scenario
    quantity: int = 1


def category_slug(category: str) -> str:
    slug = category.strip().lower()
    slug = slug.replace("&", "-").replace(" ", "-")
    slug = re.sub(r"-+", "-", slug).strip("-")
    return slug


def classify_interest(budget: Cents, cost: Cents) -> Scenario:
    return Scenario.MI if budget > cost else Scenario.CI


def configure_session(
    product: Product,
    budget_factor: float = DEFAULT_BUDGET_FACTOR,
    max_turns: int = DEFAULT_MAX_TURNS,
    sigma: Cents = DEFAULT_SIGMA_CENTS,
) -> SessionConfig:
    """Build a SessionConfig from a product's price extremes.

    List price is the historical high, cost the historical low, and the
    budget is the factor times the list price rounded to cents. An exact
    budget/cost tie is broken downward by sigma so normalized profits never
    divide by zero.
    """
    if budget_factor <= 0:
        raise ValueError("budget_factor must be positive")
    if max_turns < 1:
        raise ValueError("max_turns must be at least 1")
    if sigma <= 0:
        raise ValueError("sigma must be positive")

    list_price = product.highest_price
    cost = product.lowest_price
    budget = round_cents(Decimal(str(budget_factor)) * list_price)
    if budget == cost:
        budget = cost - sigma
    return SessionConfig(
        product=product,
        list_price=list_price,
        cost=cost,
        budget=budget,
        budget_factor=budget_factor,
        max_turns=max_turns,
        sigma=sigma,
        scenario=classify_interest(budget, cost),
    )


def _product_from_record(record: dict, index: int, counters: dict[str, int]) -> Product:
    for name in _REQUIRED_FIELDS:
        if name not in record:
            raise CatalogError(f"record {index}: missing required field {name!r}")
    codename = record.get("codename")
    if not codename:
        slug = category_slug(record["category"])
        counters[slug] = counters.get(slug, 0) + 1
        codename = f"{slug}_{counters[slug]}"
    try:
        return Product(
            title=record["title"],
            description=record.get("description", ""),
            category=record["category"],
            highest_price=cents(record["highest_price"]),
            lowest_price=cents(record["lowest_price"]),
            codename=codename,
            features=tuple(record.get("features") or ()),
            current_price=(
                cents(record["current_price"])
                if record.get("current_price") is not None
                else None
            ),
            image_url=record.get("image_url"),
        )
    except CatalogError as exc:
        raise CatalogError(f"record {index}: {exc}") from exc


def load_catalog(path: str | Path) -> list[Product]:
    """Load a JSON catalog file, assigning codenames by category order of appearance."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise CatalogError("catalog file must contain a JSON array of records")
    counters: dict[str, int] = {}
    return [_product_from_record(rec, i, counters) for i, rec in enumerate(data)]


_SYNTH_CATEGORIES = (
    "Electronics",
    "Books",
    "Toys & Games",
    "Beauty",
    "Home & Kitchen",
    "Music",
)


def synth_catalog(seed: int, n: int) -> list[Product]:
    """Generate a deterministic pseudo-catalog for fixtures and stress tests.

    Prices are whole dollars in [1, 4500] with lowest <= highest, reproducible
    per seed.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = random.Random(seed)
    counters: dict[str, int] = {}
    products = []
    for i in range(n):
        category = rng.choice(_SYNTH_CATEGORIES)
        high = rng.randint(2, 4500)
        low = rng.randint(1, high)
        slug = category_slug(category)
        counters[slug] = counters.get(slug, 0) + 1
        products.append(
            Product(
                title=f"Synthetic {category} Item {i + 1}",
                description=f"Deterministic fixture product #{i + 1}.",
                category=category,
                highest_price=high * 100,
                lowest_price=low * 100,
                codename=f"{slug}_{counters[slug]}",
            )
        )
    return products
