"""Representation counting for signed subset sums.

R(n, Gamma) counts the sign patterns (e_1, ..., e_m), e_j in {-1,0,1},
with sum e_j * gamma_j = n over a finite set Gamma of positive
integers.  Exponentially sparse counts relative to 3^|Gamma| separate
arithmetically thin frequency sets from intervals; the profile report
compares sup_n R(n, Gamma) against 3^(gamma |Gamma|) for a supplied
exponent gamma.

Counting runs over a dense convolution table when the sum range fits
in memory and over sparse dictionaries otherwise; a meet-in-the-middle
path answers single-n queries and cross-checks the dense route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "RepCount",
    "PisierProfile",
    "count_representations",
    "count_mitm",
    "full_counts",
    "pisier_profile",
]

DIRECT_CAP = 24          # |Gamma| bound for the dense/direct route
MITM_CAP = 40            # |Gamma| bound for meet-in-the-middle queries
DENSE_RANGE_CAP = 1 << 26    # dense table width cap (int64 entries)
SPARSE_STATES_CAP = 1 << 24  # sparse dictionary size cap


@dataclass
class RepCount:
    n: int
    Gamma: tuple
    count: int
    bound: float

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "Gamma": list(self.Gamma),
            "count": self.count,
            "bound": self.bound,
        }


@dataclass
class PisierProfile:
    Gamma: tuple
    gamma: float
    sup_count: int
    argmax_n: int
    bound: float
    passes: bool
    total_mass: int

    def as_dict(self) -> dict:
        return {
            "Gamma": list(self.Gamma),
            "gamma": self.gamma,
            "sup_count": self.sup_count,
            "argmax_n": self.argmax_n,
            "bound": self.bound,
            "passes": self.passes,
            "total_mass": self.total_mass,
        }


def _check_set(Gamma) -> tuple:
    g = tuple(sorted(int(x) for x in Gamma))
    if len(g) == 0:
        raise ValueError("Gamma must be nonempty")
    if len(set(g)) != len(g):
        raise ValueError("Gamma must have distinct elements")
    if g[0] <= 0:
        raise ValueError("Gamma must contain positive integers")
    return g


def _dense_counts(g: tuple) -> np.ndarray:
    """Counts over the full range [-span, span] by iterated shift-add."""
    span = sum(g)
    width = 2 * span + 1
    if width > DENSE_RANGE_CAP:
        raise ValueError(
            f"dense range {width} exceeds cap {DENSE_RANGE_CAP}; "
            f"set too wide for the dense route"
        )
    counts = np.zeros(width, dtype=np.int64)
    counts[span] = 1
    for x in g:
        nxt = counts.copy()
        nxt[x:] += counts[: width - x]
        nxt[: width - x] += counts[x:]
        counts = nxt
    return counts


def _sparse_counts(g: tuple) -> dict[int, int]:
    table = {0: 1}
    for x in g:
        nxt: dict[int, int] = {}
        for s, c in table.items():
            for t in (s, s + x, s - x):
                nxt[t] = nxt.get(t, 0) + c
        if len(nxt) > SPARSE_STATES_CAP:
            raise ValueError(
                f"sparse state count {len(nxt)} exceeds cap {SPARSE_STATES_CAP}"
            )
        table = nxt
    return table


def full_counts(Gamma) -> tuple[np.ndarray, int]:
    """(counts array over [-span, span], span); dense route only."""
    g = _check_set(Gamma)
    if len(g) > DIRECT_CAP:
        raise ValueError(f"|Gamma| = {len(g)} exceeds the direct cap {DIRECT_CAP}")
    return _dense_counts(g), sum(g)


def count_representations(n: int, Gamma) -> RepCount:
    """Exact R(n, Gamma); direct route up to 24 elements, MITM to 40."""
    g = _check_set(Gamma)
    if len(g) <= DIRECT_CAP:
        span = sum(g)
        if abs(n) > span:
            return RepCount(n=n, Gamma=g, count=0, bound=0.0)
        if 2 * span + 1 <= DENSE_RANGE_CAP:
            counts = _dense_counts(g)
            c = int(counts[n + span])
        else:
            c = int(_sparse_counts(g).get(n, 0))
        return RepCount(n=n, Gamma=g, count=c, bound=0.0)
    if len(g) <= MITM_CAP:
        return RepCount(n=n, Gamma=g, count=count_mitm(n, g), bound=0.0)
    raise ValueError(f"|Gamma| = {len(g)} exceeds the MITM cap {MITM_CAP}")


def count_mitm(n: int, Gamma) -> int:
    """R(n, Gamma) by meeting two half-set sum tables in the middle."""
    g = _check_set(Gamma)
    half = len(g) // 2
    left = _sparse_counts(g[:half])
    right = _sparse_counts(g[half:])
    total = 0
    if len(left) > len(right):
        left, right = right, left
    for s, c in left.items():
        c2 = right.get(n - s)
        if c2:
            total += c * c2
    return total


def pisier_profile(Gamma, gamma: float) -> PisierProfile:
    """sup_n R(n, Gamma) against 3^(gamma |Gamma|) for this finite set."""
    g = _check_set(Gamma)
    if len(g) > DIRECT_CAP:
        raise ValueError(
            f"|Gamma| = {len(g)} exceeds the direct cap {DIRECT_CAP} "
            f"for a full profile"
        )
    span = sum(g)
    if 2 * span + 1 <= DENSE_RANGE_CAP:
        counts = _dense_counts(g)
        arg = int(np.argmax(counts))
        sup = int(counts[arg])
        argmax_n = arg - span
        total = int(np.sum(counts, dtype=object))
    else:
        table = _sparse_counts(g)
        argmax_n, sup = max(table.items(), key=lambda kv: (kv[1], -abs(kv[0])))
        total = sum(table.values())
    bound = 3.0 ** (gamma * len(g))
    return PisierProfile(
        Gamma=g,
        gamma=gamma,
        sup_count=sup,
        argmax_n=argmax_n,
        bound=bound,
        passes=sup <= bound,
        total_mass=total,
    )
