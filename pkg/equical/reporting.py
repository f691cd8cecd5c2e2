"""
Reporting module for equical.
Display formatting for the command line; CSV output keeps full precision.
"""

import math
from typing import Dict, List, Optional, Sequence


def format_odds(value: float) -> str:
    """
    Odds at display precision: no decimals from 20 upward, one decimal from 1, two below 1.

    Args:
        value (float): Positive odds

    Returns:
        str: Formatted odds
    """
    if math.isinf(value):
        return "inf"
    if value >= 20:
        return f"{value:.0f}"
    if value >= 1:
        return f"{value:.1f}"
    return f"{value:.2f}"


def format_percentile(p: float) -> str:
    """Percentile as a percentage with two decimals."""
    return f"{100.0 * p:.2f}%"


def format_probability(p: float) -> str:
    return f"{p:.4f}"


def format_table(data: List[Dict[str, object]], headers: Optional[Sequence[str]] = None) -> str:
    """
    Format rows as a fixed-width text table.

    Args:
        data (List[Dict[str, object]]): Rows keyed by column name
        headers (Optional[Sequence[str]]): Column order; taken from the first row if None

    Returns:
        str: Table with a header line and a separator
    """
    if not data:
        return "No data available."
    if not headers:
        headers = list(data[0].keys())

    cells = [[str(row.get(h, "")) for h in headers] for row in data]
    widths = [max(len(h), *(len(r[i]) for r in cells)) for i, h in enumerate(headers)]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(headers, widths)),
        "  ".join("-" * w for w in widths),
    ]
    lines.extend("  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in cells)
    return "\n".join(lines)
