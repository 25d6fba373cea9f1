import math

import numpy as np


def ceil_count(fraction, population):
    """ceil(fraction * population), immune to float noise such as 0.07 * 100."""
    return math.ceil(round(fraction * population, 9))


def nearest_rank_percentile(values, percentile):
    """Nearest-rank percentile (no interpolation); None for an empty input."""
    if len(values) == 0:
        return None
    ordered = sorted(values)
    rank = max(1, ceil_count(percentile / 100, len(ordered)))
    return ordered[rank - 1]


def gini(values):
    """Gini coefficient of non-negative values; None when the total is zero."""
    data = np.sort(np.asarray(values, dtype=float))
    total = data.sum()
    if len(data) == 0 or total == 0:
        return None
    n = len(data)
    ranks = np.arange(1, n + 1)
    return float(2 * np.sum(ranks * data) / (n * total) - (n + 1) / n)
