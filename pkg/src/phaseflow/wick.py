"""Moments of a bivariate Gaussian via the Isserlis pairing recursion.

For a zero-mean Gaussian pair (delta, eta) with covariances
cxx = <delta^2>, cxp = <delta eta>, cpp = <eta^2>, the central moments obey

    <delta^a eta^b> = (a-1) cxx <delta^(a-2) eta^b> + b cxp <delta^(a-1) eta^(b-1)>

(for a >= 1, and the transposed rule when a = 0), with <1> = 1 and all odd
total orders vanishing.  Raw moments follow by the binomial shift around the
means.
"""

from __future__ import annotations

import math


def central_moment(cxx: float, cxp: float, cpp: float, n: int, k: int) -> float:
    """<delta^n eta^k> for the zero-mean Gaussian with the given covariances."""
    if n < 0 or k < 0:
        raise ValueError(f"moment orders must be non-negative, got ({n}, {k})")
    if (n + k) % 2 == 1:
        return 0.0
    table = {(0, 0): 1.0}

    def rec(a: int, b: int) -> float:
        if a < 0 or b < 0:
            return 0.0
        if (a + b) % 2 == 1:
            return 0.0
        try:
            return table[(a, b)]
        except KeyError:
            pass
        if a >= 1:
            val = (a - 1) * cxx * rec(a - 2, b) + b * cxp * rec(a - 1, b - 1)
        else:
            val = (b - 1) * cpp * rec(0, b - 2)
        table[(a, b)] = val
        return val

    return rec(n, k)


def central_array(cxx: float, cxp: float, cpp: float, max_order: int):
    """Array W with W[a, b] = <delta^a eta^b> for a + b <= max_order.

    Filled bottom-up by the pairing recursion, so the whole triangle costs
    O(max_order^2); entries with a + b > max_order are left at zero.
    """
    import numpy as np

    w = np.zeros((max_order + 1, max_order + 1))
    w[0, 0] = 1.0
    for total in range(2, max_order + 1, 2):
        for a in range(total + 1):
            b = total - a
            if a >= 1:
                val = b * cxp * w[a - 1, b - 1]
                if a >= 2:
                    val += (a - 1) * cxx * w[a - 2, b]
            else:
                val = (b - 1) * cpp * w[0, b - 2]
            w[a, b] = val
    return w


def central_table(cxx: float, cxp: float, cpp: float, max_order: int) -> dict:
    """All <delta^a eta^b> with a + b <= max_order, keyed by (a, b)."""
    w = central_array(cxx, cxp, cpp, max_order)
    out = {}
    for a in range(max_order + 1):
        for b in range(max_order + 1 - a):
            out[(a, b)] = float(w[a, b])
    return out


def raw_moment(
    mean_x: float,
    mean_p: float,
    cxx: float,
    cxp: float,
    cpp: float,
    n: int,
    k: int,
) -> float:
    """<x^n p^k> for the Gaussian with the given means and covariances."""
    total = 0.0
    for i in range(n + 1):
        bx = math.comb(n, i) * mean_x ** (n - i)
        for j in range(k + 1):
            c = central_moment(cxx, cxp, cpp, i, j)
            if c != 0.0:
                total += bx * math.comb(k, j) * mean_p ** (k - j) * c
    return total
