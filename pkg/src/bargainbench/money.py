"""Money arithmetic in integer cents.

All prices, budgets, and costs are stored as integer cents so that offer
echo-matching and budget computation are exact. Ratios and metrics divide
in ordinary 64-bit floats at the point of use.
"""

from decimal import Decimal, ROUND_HALF_UP

Cents = int


def cents(amount: float | str | Decimal) -> Cents:
    """Convert a dollar amount to integer cents, rounding half away from zero."""
    d = Decimal(str(amount)) if not isinstance(amount, Decimal) else amount
    return int((d * 100).quantize(Decimal("1"), rounding=ROUND_HALF_UP))


def round_cents(amount: float | Decimal) -> Cents:
    """Round a value already expressed in cents to an integer, half away from zero."""
    d = Decimal(str(amount)) if not isinstance(amount, Decimal) else amount
    return int(d.quantize(Decimal("1"), rounding=ROUND_HALF_UP))


def dollars(c: Cents) -> float:
    return c / 100


def format_dollars(c: Cents) -> str:
    """Render cents as a dollar string with no trailing zeros beyond cents.

    Whole-dollar amounts drop the decimals entirely: 3000 -> "30",
    3450 -> "34.50", 3405 -> "34.05".
    """
    sign = "-" if c < 0 else ""
    c = abs(c)
    whole, frac = divmod(c, 100)
    if frac == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:02d}"


def parse_dollars(text: str) -> Cents:
    """Parse a decimal dollar string (optional thousands commas, <= 2 decimals)."""
    cleaned = text.replace(",", "")
    d = Decimal(cleaned)
    if -d.as_tuple().exponent > 2:
        raise ValueError(f"more than two decimal places: {text!r}")
    return cents(d)
