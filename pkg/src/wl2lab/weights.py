"""Weight sequences and their regularity diagnostics.

A weight sequence is a positive function of the index n >= 0, evaluated
lazily and cached.  The diagnostics witness, on a finite range, the
three properties the rest of the library leans on: divergence of
sum 1/w_n, the doubling bound w_k ~ w_n for n <= k <= 2n, and the
minimal exponent M making (1+n)^{-M} w_n non-increasing.  All "for all
n" statements are checked on [1, cap] and the report records cap.
"""

from __future__ import annotations

import csv
import threading
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "WeightSequence",
    "RegularityReport",
    "DivergenceWitness",
    "LemmaDoubleReport",
    "power_weight",
    "weight_from_table",
    "read_weight_csv",
    "check_divergence",
    "doubling_constant",
    "estimate_M",
    "verify_lemma_double",
]

M_SEARCH_BOUND = 64


class WeightSequence:
    """Lazily evaluated positive sequence with a thread-safe cache."""

    def __init__(self, generator, name: str, domain_cap: int | None = None):
        self._generator = generator
        self.name = name
        self.domain_cap = domain_cap
        self._cache = np.empty(0, dtype=np.float64)
        self._lock = threading.Lock()

    def values(self, upto: int) -> np.ndarray:
        """Values w_0..w_upto as an array (cached)."""
        if upto < 0:
            raise ValueError("index must be nonnegative")
        if self.domain_cap is not None and upto > self.domain_cap:
            raise ValueError(
                f"weight '{self.name}' is only defined up to index {self.domain_cap}"
            )
        with self._lock:
            have = len(self._cache)
            if upto >= have:
                fresh = np.asarray(
                    self._generator(np.arange(have, upto + 1)), dtype=np.float64
                )
                if np.any(fresh <= 0) or not np.all(np.isfinite(fresh)):
                    bad = int(np.argmax((fresh <= 0) | ~np.isfinite(fresh))) + have
                    raise ValueError(f"weight '{self.name}' is not positive finite at n={bad}")
                self._cache = np.concatenate([self._cache, fresh])
            return self._cache[: upto + 1]

    def value(self, n: int) -> float:
        return float(self.values(n)[n])

    def __call__(self, n: int) -> float:
        return self.value(n)

    def floored_at_one(self) -> "WeightSequence":
        """max(w_n, 1), the normalization that keeps diagnostics comparable."""
        gen = self._generator
        return WeightSequence(
            lambda idx: np.maximum(gen(idx), 1.0),
            name=f"max({self.name},1)",
            domain_cap=self.domain_cap,
        )


def power_weight(gamma: float) -> WeightSequence:
    return WeightSequence(lambda idx: (1.0 + idx) ** gamma, name=f"power({gamma})")


def weight_from_table(values, name: str = "table") -> WeightSequence:
    arr = np.asarray(values, dtype=np.float64)

    def gen(idx):
        return arr[idx]

    return WeightSequence(gen, name=name, domain_cap=len(arr) - 1)


def read_weight_csv(path) -> WeightSequence:
    """CSV with header n,value; indices must cover 0..max contiguously."""
    pairs = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:2] != ["n", "value"]:
            raise ValueError(f"unexpected weight CSV header: {header}")
        for row in reader:
            pairs.append((int(row[0]), float(row[1])))
    pairs.sort()
    ns = [p[0] for p in pairs]
    if ns != list(range(len(ns))):
        raise ValueError("weight CSV must list indices 0..N contiguously")
    return weight_from_table([p[1] for p in pairs], name=str(path))


# ---------------------------------------------------------------------------
# reports


@dataclass
class DivergenceWitness:
    target: float
    N_hit: int | None
    partial_sum_at_cap: float
    cap: int

    @property
    def crossed(self) -> bool:
        return self.N_hit is not None

    def as_dict(self) -> dict:
        return {
            "target": self.target,
            "N_hit": self.N_hit,
            "partial_sum_at_cap": self.partial_sum_at_cap,
            "cap": self.cap,
        }


@dataclass
class RegularityReport:
    C_est: float | None = None
    M_est: int | None = None
    range_checked: int = 0
    violations: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "C_est": self.C_est,
            "M_est": self.M_est,
            "range_checked": self.range_checked,
            "violations": self.violations[:32],
            "notes": self.notes,
        }


@dataclass
class LemmaDoubleReport:
    M: int
    cap: int
    K_b: float
    K_b_argmax: int
    K_c: float
    K_c_argmax: int
    tail_cap: int
    tail_bound_if_monotone: float
    vacuous_tail_at: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "M": self.M,
            "cap": self.cap,
            "K_b": self.K_b,
            "K_b_argmax": self.K_b_argmax,
            "K_c": self.K_c,
            "K_c_argmax": self.K_c_argmax,
            "tail_cap": self.tail_cap,
            "tail_bound_if_monotone": self.tail_bound_if_monotone,
            "vacuous_tail_at": self.vacuous_tail_at,
        }


# ---------------------------------------------------------------------------
# diagnostics


def check_divergence(w: WeightSequence, target: float, cap: int) -> DivergenceWitness:
    """Scan n = 1..cap accumulating 1/w_n; report the first crossing of target."""
    if target <= 0:
        raise ValueError("target must be positive")
    if cap < 1:
        raise ValueError("cap must be >= 1")
    vals = w.values(cap)
    partial = np.cumsum(1.0 / vals[1:])
    hit = int(np.searchsorted(partial, target))
    if hit >= len(partial):
        return DivergenceWitness(target, None, float(partial[-1]), cap)
    # searchsorted finds partial[hit] >= target with strict inequality below
    return DivergenceWitness(target, hit + 1, float(partial[-1]), cap)


def _sparse_table(vals: np.ndarray, combine) -> list[np.ndarray]:
    table = [vals]
    span = 1
    while 2 * span <= len(vals):
        prev = table[-1]
        table.append(combine(prev[: len(prev) - span], prev[span:]))
        span *= 2
    return table


def _range_query(table, lo: np.ndarray, hi: np.ndarray, combine):
    """Combine over inclusive index windows [lo, hi], vectorized."""
    length = hi - lo + 1
    k = np.floor(np.log2(length)).astype(int)
    left = np.empty(len(lo))
    right = np.empty(len(lo))
    for kk in np.unique(k):
        sel = k == kk
        t = table[kk]
        left[sel] = t[lo[sel]]
        right[sel] = t[hi[sel] - (1 << kk) + 1]
    return combine(left, right)


def doubling_constant(
    w: WeightSequence, cap: int, violation_threshold: float | None = None
) -> RegularityReport:
    """C_est = max over 1 <= n <= cap/2, n <= k <= 2n of max(w_k/w_n, w_n/w_k)."""
    if cap < 2:
        raise ValueError("cap must be >= 2")
    vals = w.values(cap)
    tmax = _sparse_table(vals, np.maximum)
    tmin = _sparse_table(vals, np.minimum)
    n = np.arange(1, cap // 2 + 1)
    wmax = _range_query(tmax, n, 2 * n, np.maximum)
    wmin = _range_query(tmin, n, 2 * n, np.minimum)
    up = wmax / vals[n]
    down = vals[n] / wmin
    ratios = np.maximum(up, down)
    report = RegularityReport(C_est=float(np.max(ratios)), range_checked=cap)
    if violation_threshold is not None:
        bad = np.nonzero(ratios > violation_threshold)[0]
        for i in bad[:32]:
            nn = int(n[i])
            seg = vals[nn : 2 * nn + 1]
            k_up = nn + int(np.argmax(seg))
            k_dn = nn + int(np.argmin(seg))
            k_witness = k_up if up[i] >= down[i] else k_dn
            report.violations.append((nn, k_witness, float(ratios[i])))
        if len(bad):
            report.notes.append(
                f"doubling ratio exceeds {violation_threshold} at {len(bad)} indices"
            )
    return report


def estimate_M(w: WeightSequence, cap: int) -> RegularityReport:
    """Smallest integer M >= 1 with (1+n)^{-M} w_n non-increasing on [1, cap].

    Works through the per-step requirement w_{n+1}/w_n <= ((n+2)/(n+1))^M,
    so M_est = max_n ceil(log(w_{n+1}/w_n) / log((n+2)/(n+1))) clipped at 1.
    The search is bounded: demands beyond M = 64 flag super-polynomial
    growth on the range instead of returning an exponent.
    """
    if cap < 2:
        raise ValueError("cap must be >= 2")
    vals = w.values(cap)
    n = np.arange(1, cap)
    lratio = np.log(vals[2:]) - np.log(vals[1:-1])
    lbase = np.log((n + 2.0) / (n + 1.0))
    demand = lratio / lbase
    # a relative slack keeps exact-equality cases (e.g. gamma = 1, M = 1)
    # from rounding up through float noise
    m_needed = np.ceil(demand - 1e-9)
    M_est = int(max(1, np.max(m_needed))) if len(m_needed) else 1
    report = RegularityReport(range_checked=cap)
    if M_est > M_SEARCH_BOUND:
        report.M_est = None
        worst = int(np.argmax(m_needed)) + 1
        report.notes.append(
            f"no M <= {M_SEARCH_BOUND} makes (1+n)^-M w_n non-increasing on [1, {cap}]; "
            f"weight grows super-polynomially on the range (worst step at n={worst})"
        )
        report.violations.append((worst, worst + 1, float(demand[worst - 1])))
        return report
    report.M_est = M_est
    # first violating step for each rejected exponent below M_est
    for M in range(1, M_est):
        bad = np.nonzero(m_needed > M)[0]
        if len(bad):
            report.violations.append((int(bad[0]) + 1, M, float(demand[bad[0]])))
    return report


def verify_lemma_double(
    w: WeightSequence, M: int, cap: int, tail_factor: int = 8
) -> LemmaDoubleReport:
    """Measure the smallest constants K_b, K_c in the two summation bounds.

    (b)  sum_{j<=n} j^{M-1}/w_j        <= K_b * n^M / w_n
    (c)  sum_{n<j<=tail_cap} 1/(w_j j^{M+1}) <= K_c / (n^M w_n)

    for all n <= cap, with the (c) tail truncated at tail_cap = tail_factor*cap.
    The truncation error of (c) is bounded by the integral test assuming the
    weight is non-decreasing past tail_cap, and recorded.
    """
    est = estimate_M(w, cap)
    if est.M_est is not None and M <= est.M_est:
        raise ValueError(f"need M > M_est = {est.M_est}, got M = {M}")
    tail_cap = tail_factor * cap
    vals = w.values(tail_cap)
    n = np.arange(1, cap + 1)
    j = np.arange(1, tail_cap + 1)

    lhs_b = np.cumsum(j[: cap] ** (M - 1) / vals[1 : cap + 1])
    frame_b = n.astype(np.float64) ** M / vals[1 : cap + 1]
    ratios_b = lhs_b / frame_b
    kb_arg = int(np.argmax(ratios_b))

    terms_c = 1.0 / (vals[1:] * j.astype(np.float64) ** (M + 1))
    suffix = np.concatenate([np.cumsum(terms_c[::-1])[::-1], [0.0]])
    # tail over j in (n, tail_cap]
    lhs_c = suffix[n]
    frame_c = 1.0 / (n.astype(np.float64) ** M * vals[1 : cap + 1])
    ratios_c = lhs_c / frame_c
    kc_arg = int(np.argmax(ratios_c))

    tail_bound = 1.0 / (vals[tail_cap] * M * float(tail_cap) ** M)
    vacuous = [int(nn) for nn in (tail_cap,) if nn <= cap]
    return LemmaDoubleReport(
        M=M,
        cap=cap,
        K_b=float(ratios_b[kb_arg]),
        K_b_argmax=kb_arg + 1,
        K_c=float(ratios_c[kc_arg]),
        K_c_argmax=kc_arg + 1,
        tail_cap=tail_cap,
        tail_bound_if_monotone=float(tail_bound),
        vacuous_tail_at=vacuous,
    )
