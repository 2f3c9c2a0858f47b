"""
Report Module

Tabulates balancing runs: the alpha sweep over the LF/FL and phi/phi^-1 maps of
one RLBWT, and the key=value summaries the command line prints.
"""

import logging

import pandas as pd

from balancer import balance
from movequery import max_scan_length
from rlbwt import build_lcp_context, lf_intervals
from utils import peak_memory_mib, stopwatch

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = [
    "perm",
    "alpha",
    "r",
    "r_prime",
    "insertions",
    "increase_pct",
    "seconds",
    "peak_mib",
    "walk_visits",
    "max_scan",
]

PAIR_LABELS = ("lf/fl", "phi/phi-inv")


def increase_pct(r, r_prime):
    """Percentage interval increase caused by balancing."""
    return 100.0 * (r_prime - r) / r if r else 0.0


def _sweep_row(label, imap, alpha):
    with stopwatch() as timing:
        pair = balance(imap, alpha)
    stats = pair.stats
    return {
        "perm": label,
        "alpha": alpha,
        "r": stats.r,
        "r_prime": stats.r_prime,
        "insertions": stats.insertions,
        "increase_pct": round(increase_pct(stats.r, stats.r_prime), 3),
        "seconds": round(timing["seconds"], 6),
        "peak_mib": peak_memory_mib(),
        "walk_visits": stats.walk_visits,
        "max_scan": stats.max_scan,
    }


def sweep(rlbwt, alphas):
    """
    Balance the LF and phi maps of one RLBWT for every alpha.

    Args:
        rlbwt (Rlbwt): Validated runs
        alphas (iterable): Balancing parameters to try

    Returns:
        pandas.DataFrame: One row per (map, alpha), columns SWEEP_COLUMNS
    """
    rows = []
    lf = lf_intervals(rlbwt)
    for alpha in alphas:
        rows.append(_sweep_row(PAIR_LABELS[0], lf, alpha))
        phi = build_lcp_context(rlbwt, alpha).phi_map
        rows.append(_sweep_row(PAIR_LABELS[1], phi, alpha))
        logger.info(f"Sweep alpha={alpha}: LF r'={rows[-2]['r_prime']}, phi r'={rows[-1]['r_prime']}")
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def format_key_values(values):
    """One 'key=value' line per entry, in insertion order."""
    return "".join(f"{key}={_format_value(value)}\n" for key, value in values.items())


def _format_value(value):
    if value is None:
        return "na"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def format_sweep(df, style="table"):
    """
    Render a sweep DataFrame.

    Args:
        df (pandas.DataFrame): Output of `sweep`
        style (str): 'table', 'csv' or 'kv'

    Returns:
        str: Rendered text ending in a newline
    """
    if style == "csv":
        return df.to_csv(index=False)
    if style == "kv":
        lines = []
        for record in df.to_dict(orient="records"):
            lines.append(" ".join(f"{key}={_format_value(_plain(value))}" for key, value in record.items()))
        return "\n".join(lines) + "\n"
    return df.to_string(index=False) + "\n"


def _plain(value):
    # pandas hands back numpy scalars and NaN for missing peaks
    if pd.isna(value):
        return None
    if hasattr(value, "item"):
        return value.item()
    return value


def structure_summary(ms):
    """Key figures of one move structure."""
    return {
        "n": ms.n,
        "r_prime": ms.r_prime,
        "alpha": ms.alpha,
        "max_scan": max_scan_length(ms),
    }


def balance_summary(pair, seconds=None):
    """Key figures of one balancing run, for `build --stats`."""
    stats = pair.stats
    values = {
        "r": stats.r,
        "r_prime": stats.r_prime,
        "insertions": stats.insertions,
        "increase_pct": round(increase_pct(stats.r, stats.r_prime), 3),
        "cascade_splits": stats.cascade_splits,
        "walk_visits": stats.walk_visits,
        "max_scan": stats.max_scan,
    }
    if seconds is not None:
        values["seconds"] = round(seconds, 6)
        values["peak_mib"] = peak_memory_mib()
    return values
