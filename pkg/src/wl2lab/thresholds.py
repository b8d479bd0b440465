"""Threshold constructions at the two ends of the weighted-l2 scale.

Three artifacts live here:

* a continuous function whose weighted coefficient energy diverges, for
  any weight growing to infinity: shifted copies of a fixed polynomial
  placed along a sparse frequency ladder, with the weighted energy of
  every prefix bounded below by a quarter per block;

* a weight sequence interpolated through prescribed nodes that makes
  sum Phi(1/lambda_n) diverge for a caller-supplied increasing Phi
  while keeping the node values exact, stage by stage;

* the two hypothesis tests (low-frequency energy, high-frequency sup)
  whose conjunction forces numerical support to be dense, juxtaposed
  with the measured support gap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fourier import (
    CoeffVector,
    GridFunction,
    dft,
    fejer_mean,
    idft,
    next_power_of_two,
    shift_frequencies,
)
from .tolerances import DEFAULT_TOLS, Tolerances
from .weights import WeightSequence

__all__ = [
    "ThresholdWitness",
    "StageSpec",
    "IiStrongSpec",
    "KMTestResult",
    "build_T0",
    "select_gaps",
    "build_divergent_continuous",
    "phi_builtin",
    "build_iistrong_weights",
    "km_hypothesis_test",
    "random_unit_ball",
]


# ---------------------------------------------------------------------------
# divergent continuous function


@dataclass
class ThresholdWitness:
    T0: CoeffVector
    N0: int
    T0_sup: float
    T0_l2: float
    gaps: list[int]
    partial_f: CoeffVector
    weighted_partial_sums: np.ndarray
    mtest_partial_sums: np.ndarray
    f_sup: float

    def as_dict(self) -> dict:
        return {
            "N0": self.N0,
            "T0_sup": self.T0_sup,
            "T0_l2": self.T0_l2,
            "gaps": self.gaps,
            "weighted_partial_sums": [float(x) for x in self.weighted_partial_sums],
            "mtest_partial_sums": [float(x) for x in self.mtest_partial_sums],
            "f_sup": self.f_sup,
            "degree": self.partial_f.degree,
        }


def build_T0(K: int, G: int = 4096) -> tuple[CoeffVector, int, float, float]:
    """Base polynomial: the tapered mean of degree K of e^{i cos(2 pi t)},
    real part, rescaled so its sup is at most 1.

    Returns (T0, N0, sup, l2); retries with K doubled (three times) if
    the quadrature L2 norm falls below 1/2.
    """
    if K < 4:
        raise ValueError("need K >= 4")
    for _ in range(4):
        G_use = max(G, next_power_of_two(4 * K))
        t = np.arange(G_use) / G_use
        h = np.exp(1j * np.cos(2 * np.pi * t))
        c = fejer_mean(dft(GridFunction(h)), K)
        c = c.enforce_real()  # real part of the mean
        vals = idft(c, G_use).real()
        sup = float(np.max(np.abs(vals)))
        scale = 1.0 / max(1.0, sup)
        c.coeffs *= scale
        vals *= scale
        sup = float(np.max(np.abs(vals)))
        l2 = float(np.sqrt(np.mean(vals**2)))
        if l2 >= 0.5:
            return c.trimmed(K), K, sup, l2
        K *= 2
    raise RuntimeError(f"L2 norm stayed below 1/2 up to Fejer degree {K}")


def select_gaps(
    w: WeightSequence, J: int, N0: int, scan_cap: int = 10**7
) -> list[int]:
    """Frequency ladder: n_j minimal above the spacing constraint with
    w(n_j) >= (j+1)^4, forcing sum 1/sqrt(w(n_j)) to converge."""
    gaps: list[int] = []
    prev = 2 * N0
    for j in range(1, J + 1):
        lo = max(prev + 2 * N0, 2 * N0 + 1)
        target = float(j + 1) ** 4
        hi = max(2 * lo, 1024)
        n_j = None
        while True:
            hi = min(hi, scan_cap)
            vals = w.values(hi)
            cand = np.nonzero(vals[lo:] >= target)[0]
            if len(cand):
                n_j = lo + int(cand[0])
                break
            if hi >= scan_cap:
                raise ValueError(
                    f"weight '{w.name}' never reaches {target} by index "
                    f"{scan_cap}: the unboundedness premise fails"
                )
            hi *= 4
        gaps.append(n_j)
        prev = n_j
    return gaps


def build_divergent_continuous(
    w: WeightSequence, J: int, K: int, G: int = 4096
) -> ThresholdWitness:
    """f = sum_j w(n_j)^{-1/2} zeta^{n_j} T0, with per-block energy ledger.

    The blocks' coefficient supports are pairwise disjoint by the gap
    spacing, so the weighted energy of the first J' blocks is an exact
    blockwise sum; the report also carries the uniform-convergence
    witness sum_j w(n_j)^{-1/2}.
    """
    T0, N0, sup, l2 = build_T0(K, G)
    gaps = select_gaps(w, J, N0)
    lamg = np.array([w.value(n) for n in gaps])

    # blockwise weighted energy, exact and independent of the dense array
    t0m = np.abs(T0.coeffs) ** 2
    offs = np.arange(-N0, N0 + 1)
    partial = np.zeros(J)
    acc = 0.0
    for j, n_j in enumerate(gaps):
        lam_block = np.array(w.values(n_j + N0)[np.abs(n_j + offs)], dtype=float)
        acc += float(np.sum(t0m * lam_block)) / lamg[j]
        partial[j] = acc

    deg = gaps[-1] + N0
    f = CoeffVector.zeros(deg)
    for j, n_j in enumerate(gaps):
        shifted = shift_frequencies(T0, n_j)
        k = deg - shifted.degree
        f.coeffs[k : k + len(shifted.coeffs)] += shifted.coeffs / math.sqrt(lamg[j])

    G_eval = next_power_of_two(2 * deg + 2)
    f_sup = float(np.max(np.abs(idft(f, G_eval).samples)))
    mtest = np.cumsum(1.0 / np.sqrt(lamg))
    return ThresholdWitness(
        T0=T0,
        N0=N0,
        T0_sup=sup,
        T0_l2=l2,
        gaps=gaps,
        partial_f=f,
        weighted_partial_sums=partial,
        mtest_partial_sums=mtest,
        f_sup=f_sup,
    )


# ---------------------------------------------------------------------------
# stagewise interpolated weights


@dataclass
class StageSpec:
    k: int
    N_lo: int
    N_hi: int
    eps_lo: float
    eps_hi: float
    inv_lo: float
    inv_hi: float


@dataclass
class IiStrongSpec:
    phi_name: str
    eps_schedule: list[float]
    N_schedule: list[int]
    stages: list[StageSpec]
    lam: WeightSequence
    stage_sums: list[float] = field(default_factory=list)

    def node_value(self, k: int) -> float:
        """Lambda at node k (1-based): 2^{2k} / eps_k^2, the expression
        the generator holds bit-exactly at the node index."""
        return 4.0**k / self.eps_schedule[k - 1] ** 2

    def as_dict(self) -> dict:
        return {
            "phi": self.phi_name,
            "eps_schedule": self.eps_schedule,
            "N_schedule": self.N_schedule,
            "stage_sums": self.stage_sums,
        }


def phi_builtin(name: str, p: float = 1.0):
    """Built-in increasing functions for the divergence scale."""
    if name == "identity":
        return lambda x: x
    if name == "power":
        return lambda x: x**p
    if name == "xlog":
        return lambda x: x / np.log(np.e + 1.0 / x)
    raise ValueError(f"unknown phi '{name}'")


def build_iistrong_weights(
    phi,
    eps_schedule: list[float],
    K_stages: int,
    stretch: int = 1,
    phi_name: str = "custom",
) -> IiStrongSpec:
    """Stagewise weight: nodes lambda(N_k) = 2^{2k}/eps_k^2 held exactly,
    1/lambda affine in n between nodes, stage lengths forced by
    (N_{k+1} - N_k) * phi(eps_k^2 2^{-2k-1}) >= 1.
    """
    if K_stages < 1:
        raise ValueError("need at least one stage")
    if len(eps_schedule) < K_stages + 1:
        raise ValueError("eps_schedule must cover K_stages + 1 values")
    eps = list(eps_schedule[: K_stages + 1])
    if not all(e2 < e1 for e1, e2 in zip(eps, eps[1:])):
        raise ValueError("eps_schedule must be strictly decreasing")
    if any(e <= 0 or e > 1 for e in eps):
        raise ValueError("eps_schedule values must lie in (0, 1]")
    if stretch < 1:
        raise ValueError("stretch must be >= 1")

    N = [1]
    stages = []
    for k in range(1, K_stages + 1):
        arg = eps[k - 1] ** 2 * 2.0 ** (-2 * k - 1)
        val = float(phi(arg))
        if not (val > 0.0) or arg < 1e-300:
            raise ValueError(f"phi underflows at stage {k}: phi({arg:.3e}) = {val}")
        step = stretch * math.ceil(1.0 / val)
        N.append(N[-1] + step)
        stages.append(
            StageSpec(
                k=k,
                N_lo=N[-2],
                N_hi=N[-1],
                eps_lo=eps[k - 1],
                eps_hi=eps[k],
                inv_lo=eps[k - 1] ** 2 / 4.0**k,
                inv_hi=eps[k] ** 2 / 4.0 ** (k + 1),
            )
        )

    nodes = np.array(N, dtype=np.int64)
    # lambda at node k is 2^{2k}/eps_k^2 held bit-exactly; between nodes
    # 1/lambda is affine in n
    lam_nodes = np.array(
        [4.0**k / eps[k - 1] ** 2 for k in range(1, K_stages + 2)], dtype=float
    )
    inv_nodes = 1.0 / lam_nodes

    def gen(idx):
        idx = np.asarray(idx, dtype=np.int64)
        out = np.empty(len(idx), dtype=float)
        below = idx < nodes[0]
        # below the first node the weight is held at the first node value
        out[below] = lam_nodes[0]
        inside = ~below
        if np.any(inside):
            pos = np.searchsorted(nodes, idx[inside], side="right") - 1
            pos = np.minimum(pos, len(nodes) - 2)
            n_lo = nodes[pos]
            n_hi = nodes[pos + 1]
            frac = (idx[inside] - n_lo) / (n_hi - n_lo)
            inv = inv_nodes[pos] + frac * (inv_nodes[pos + 1] - inv_nodes[pos])
            vals = 1.0 / inv
            at_node = idx[inside] == n_lo
            vals = np.where(at_node, lam_nodes[pos], vals)
            out[inside] = vals
        at_last = idx == nodes[-1]
        out[at_last] = lam_nodes[-1]
        return out

    lam = WeightSequence(gen, name=f"iistrong({phi_name})", domain_cap=int(nodes[-1]))
    spec = IiStrongSpec(
        phi_name=phi_name,
        eps_schedule=eps,
        N_schedule=N,
        stages=stages,
        lam=lam,
    )
    # per-stage divergence over the first half of each stage
    for st in stages:
        mid = (st.N_lo + st.N_hi) // 2
        n = np.arange(st.N_lo, mid + 1)
        vals = lam.values(mid)[n]
        spec.stage_sums.append(float(np.sum([float(phi(1.0 / v)) for v in vals])))
    return spec


# ---------------------------------------------------------------------------
# support-density hypothesis tests


@dataclass
class KMTestResult:
    N: int
    gamma: float
    eps: float
    cond1_value: float
    cond2_value: float
    cond1_pass: bool
    cond2_pass: bool
    cond2_vacuous: bool
    support_gap: float

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def km_hypothesis_test(
    S: CoeffVector,
    N: int,
    gamma: float,
    eps: float,
    G: int,
    tau_supp: float | None = None,
    tols: Tolerances = DEFAULT_TOLS,
) -> KMTestResult:
    """Evaluate the two support-density hypotheses and the measured gap.

    cond1: sum_{|n| <= N} |S^(n)|^2 >= gamma.
    cond2: sup_{|n| > N} |S^(n)| <= eps (vacuous if S has no such modes).
    The support gap is the largest grid distance to the numerical
    support of the truncated representative; no claim is made that the
    hypotheses force any particular gap, the numbers sit side by side.
    """
    tau = tols.tau_supp if tau_supp is None else tau_supp
    deg = S.degree
    n = np.abs(S.indices())
    mags = np.abs(S.coeffs)
    cond1 = float(np.sum(mags[n <= N] ** 2))
    outside = n > N
    vacuous = not bool(np.any(outside))
    cond2 = 0.0 if vacuous else float(np.max(mags[outside]))

    from .baire import numerical_support, _nearest_index_dist

    supp = numerical_support(S, G, tau)
    if supp.is_empty:
        gap = 0.5
    elif supp.is_full:
        gap = 0.0
    else:
        gap = float(np.max(_nearest_index_dist(supp))) / G
    return KMTestResult(
        N=N,
        gamma=gamma,
        eps=eps,
        cond1_value=cond1,
        cond2_value=cond2,
        cond1_pass=cond1 >= gamma,
        cond2_pass=vacuous or cond2 <= eps,
        cond2_vacuous=vacuous,
        support_gap=gap,
    )


def random_unit_ball(
    lam: WeightSequence, degree: int, rng: np.random.Generator
) -> CoeffVector:
    """Random real-valued coefficient vector with weighted norm exactly 1."""
    c = CoeffVector(
        rng.normal(size=2 * degree + 1) + 1j * rng.normal(size=2 * degree + 1)
    ).enforce_real()
    from .fourier import weighted_norm

    nrm = weighted_norm(c, lam).value
    c.coeffs /= nrm
    return c
