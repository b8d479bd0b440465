"""Smooth localizing functions.

For a weight sequence w with divergent sum 1/w_n and a requested
epsilon, the localizer psi is a real trigonometric polynomial with

  (i)    0 <= psi <= 1 + epsilon on the grid,
  (ii)   psi = 0 on an arc around t = 0 whose length shrinks with
         epsilon,
  (iii)  mean exactly 1,
  (iv)   sup_{n != 0} |psi^(n)| <= epsilon, with polynomial decay at
         the top of the spectrum,
  (v)    sum_{n != 0} |psi^(n)|^2 w_{|n|} <= epsilon^2.

Assembly: psi = 1 - (1/L) sum_{j0 <= j <= S} (1/w_j) g_j, where g_j is
a building block at scale eta = 1/j, j0 = ceil(1/eps), S is the
smallest index with S > 2/eps whose partial sum L = sum 1/w_j reaches
1/eps, and the blocks share one floor parameter.  Every block equals 1
on the common central plateau, so psi vanishes there exactly up to
roundoff; the mean is exact because every block has exact mean zero.

Property (v) is the one the construction cannot guarantee a priori at
desk scale, so it is measured, and the build rescales: if the measured
energy exceeds epsilon^2 the whole assembly is rebuilt with the working
parameter halved (the block floor parameter deepens alongside, which is
what actually shrinks the energy).  At most eight halvings are
attempted before the build fails with the measured constants attached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .blocks import BlockConstructionError, _design, _profile, _trim_by_l1
from .fourier import (
    CoeffVector,
    GridFunction,
    dft,
    idft,
    next_power_of_two,
)
from .tolerances import DEFAULT_TOLS, Tolerances
from .weights import WeightSequence

__all__ = [
    "LocalizerParams",
    "Localizer",
    "LocalizerReport",
    "LocalizerBuildError",
    "choose_S",
    "build_localizer",
    "verify_localizer",
]

# blocks inside a localizer are built lighter than standalone ones: the
# sampling grid carries this many points across the finest scale, and
# the floor parameter is deepened by this factor beyond the 2/eps
# requirement (deeper blocks spread their correction wider, which is
# what keeps the weighted tail energy small)
RES_FACTOR_LOCAL = 32
BLOCK_DEPTH_FACTOR = 8.0
G_LOCAL_MAX = 1 << 24
MAX_RESCALINGS = 8


class LocalizerBuildError(RuntimeError):
    def __init__(self, message: str, report: "LocalizerReport | None" = None):
        super().__init__(message)
        self.report = report


@dataclass
class LocalizerParams:
    epsilon: float
    M: int
    S: int
    L_value: float
    j_lo: int
    S_block: int
    eps_work: float

    def as_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "M": self.M,
            "S": self.S,
            "L_value": self.L_value,
            "j_lo": self.j_lo,
            "S_block": self.S_block,
            "eps_work": self.eps_work,
        }


@dataclass
class LocalizerReport:
    grid_min: float
    grid_max: float
    deleted_arc_len: float
    deleted_arc_residual: float
    mean_coeff: complex
    coeff_sup: float
    tail_energy: float
    decay_slope: float
    passes: dict = field(default_factory=dict)

    def all_pass(self) -> bool:
        return all(self.passes.values())

    def as_dict(self) -> dict:
        return {
            "grid_min": self.grid_min,
            "grid_max": self.grid_max,
            "deleted_arc_len": self.deleted_arc_len,
            "deleted_arc_residual": self.deleted_arc_residual,
            "mean_coeff": [self.mean_coeff.real, self.mean_coeff.imag],
            "coeff_sup": self.coeff_sup,
            "tail_energy": self.tail_energy,
            "decay_slope": self.decay_slope,
            "passes": self.passes,
        }


@dataclass
class Localizer:
    params: LocalizerParams
    psi: CoeffVector
    report: LocalizerReport


def choose_S(
    w: WeightSequence, epsilon: float, scan_cap: int = 10**7
) -> LocalizerParams:
    """Pick the summation range for the localizer at this epsilon.

    S is the smallest integer with S > 2/epsilon and
    sum_{ceil(1/eps) <= j <= S} 1/w_j >= 1/epsilon; L_value is that
    sum.  Failure to reach 1/epsilon within scan_cap is reported as a
    failure of the divergence premise.
    """
    if not (0.0 < epsilon < 1.0):
        raise ValueError("epsilon must lie in (0, 1)")
    j_lo = math.ceil(1.0 / epsilon)
    S_floor = math.floor(2.0 / epsilon) + 1  # smallest integer > 2/eps
    target = 1.0 / epsilon

    hi = max(4 * S_floor, 4 * j_lo, 1024)
    while True:
        hi = min(hi, scan_cap)
        vals = w.values(hi)
        csum = np.cumsum(1.0 / vals[j_lo:])
        pos = int(np.searchsorted(csum, target))
        if pos < len(csum):
            S = max(j_lo + pos, S_floor)
            L = float(csum[S - j_lo])
            return LocalizerParams(
                epsilon=epsilon,
                M=0,
                S=S,
                L_value=L,
                j_lo=j_lo,
                S_block=S,
                eps_work=epsilon,
            )
        if hi >= scan_cap:
            raise LocalizerBuildError(
                f"partial sums of 1/w reach only {float(csum[-1]):.4g} < "
                f"{target:.4g} by index {scan_cap}: the divergence premise "
                f"(hypothesis (i)) fails for weight '{w.name}' at eps={epsilon}"
            )
        hi *= 4


def _add_block_samples(
    acc: np.ndarray, scales: np.ndarray, weights: np.ndarray, p: int, factor: float
) -> None:
    """Add factor * (normalized block samples) into the bucket accumulator.

    Bumps are even and compactly supported, so each scale only touches
    the index ranges [0, m] and [G-m, G) with m = 1.5 * rho * G; the
    plateau contributes a constant over the whole circle only through
    the other scales' plateaus, handled per scale below.
    """
    G_b = len(acc)
    plateau_val = float(np.sum(weights))
    for rho, cj in zip(scales, weights):
        m = int(math.floor(1.5 * rho * G_b)) + 1
        m = min(m, G_b // 2)
        coef = factor * cj / plateau_val
        idx_r = np.arange(m + 1)
        vals_r = _profile(idx_r / (rho * G_b), p)
        acc[: m + 1] += coef * vals_r
        acc[G_b - m :] += coef * vals_r[1 : m + 1][::-1]


def _assemble(
    w: WeightSequence, params: LocalizerParams, trim_l1: float = 1e-13
) -> CoeffVector:
    """Accumulate the weighted blocks into the coefficient array of psi.

    Blocks sharing one sampling-grid size are summed in sample space and
    transformed together; the transform is linear, so the result is
    identical to per-block transforms at a fraction of the cost.
    """
    lam = w.values(params.S)
    M, S_blk = params.M, params.S_block
    p = M + 3
    buckets: dict[int, np.ndarray] = {}
    for j in range(params.S, params.j_lo - 1, -1):
        eta = 1.0 / j
        scales, weights, _ = _design(eta, M, S_blk)
        rho0 = scales[0]
        G_b = next_power_of_two(int(math.ceil(RES_FACTOR_LOCAL / rho0)))
        if G_b > G_LOCAL_MAX:
            raise LocalizerBuildError(
                f"block at j={j} needs sampling grid {G_b} beyond {G_LOCAL_MAX}"
            )
        acc = buckets.get(G_b)
        if acc is None:
            acc = buckets[G_b] = np.zeros(G_b)
        _add_block_samples(
            acc, scales, weights, p, factor=-1.0 / (params.L_value * lam[j])
        )

    deg = max(G_b // 2 - 1 for G_b in buckets)
    psi = np.zeros(2 * deg + 1, dtype=np.complex128)
    for G_b in sorted(buckets):
        c = dft(GridFunction(buckets[G_b]))
        c.coeffs[c.degree] = 0.0  # blocks are exactly mean-free
        c = _trim_by_l1(c.enforce_real(), trim_l1)
        off = deg - c.degree
        psi[off : off + len(c.coeffs)] += c.coeffs
    psi[deg] += 1.0
    out = CoeffVector(psi).enforce_real()
    out.coeffs[deg] = 1.0  # exact mean
    return out


def build_localizer(
    w: WeightSequence,
    epsilon: float,
    G: int,
    M: int | None = None,
    tols: Tolerances = DEFAULT_TOLS,
    scan_cap: int = 10**7,
) -> Localizer:
    """Build psi for (w, epsilon), rescaling until property (v) holds."""
    if M is None:
        from .weights import estimate_M

        est = estimate_M(w, min(scan_cap, 10**5))
        if est.M_est is None:
            raise LocalizerBuildError(
                "weight grows super-polynomially; no usable exponent M"
            )
        M = est.M_est + 2

    eps_work = epsilon
    last_report = None
    for _ in range(MAX_RESCALINGS + 1):
        params = choose_S(w, eps_work, scan_cap=scan_cap)
        params.M = M
        params.S_block = math.ceil(BLOCK_DEPTH_FACTOR / eps_work) + 1
        params.epsilon = epsilon
        params.eps_work = eps_work
        try:
            psi = _assemble(w, params)
        except (LocalizerBuildError, BlockConstructionError) as exc:
            raise LocalizerBuildError(
                f"block construction failed at eps_work={eps_work}: {exc}"
            ) from exc
        loc = Localizer(params=params, psi=psi, report=None)
        loc.report = verify_localizer(loc, w, G=G, tols=tols)
        if loc.report.passes["tail_energy"]:
            if loc.report.all_pass():
                return loc
            raise LocalizerBuildError(
                f"localizer failed verification beyond the energy target: "
                f"{loc.report.passes}",
                loc.report,
            )
        last_report = loc.report
        eps_work /= 2.0
    raise LocalizerBuildError(
        f"rescaling exhausted after {MAX_RESCALINGS} halvings; last measured "
        f"tail energy {last_report.tail_energy:.4g} vs target {epsilon**2:.4g}",
        last_report,
    )


def verify_localizer(
    loc: Localizer,
    w: WeightSequence,
    G: int = 0,
    tols: Tolerances = DEFAULT_TOLS,
) -> LocalizerReport:
    """Measure the five properties of psi on grid and coefficients."""
    psi = loc.psi
    eps = loc.params.epsilon
    N = psi.degree
    G_eval = max(next_power_of_two(2 * N + 2), G)
    g = idft(psi, G_eval).real()

    grid_min = float(np.min(g))
    grid_max = float(np.max(g))

    # maximal symmetric grid arc around 0 with |psi| <= tau_supp
    dead = np.abs(g) <= tols.tau_supp
    arc_len = 0.0
    residual = float(np.abs(g[0]))
    if dead[0]:
        kmax = 0
        while kmax + 1 < G_eval // 2 and dead[kmax + 1] and dead[G_eval - kmax - 1]:
            kmax += 1
        arc_len = (2 * kmax + 1) / G_eval
        sel = np.concatenate([g[: kmax + 1], g[G_eval - kmax :]])
        residual = float(np.max(np.abs(sel)))

    mean_coeff = psi.at(0)

    n = np.abs(psi.indices())
    lam = w.values(N)[n]
    mags2 = np.abs(psi.coeffs) ** 2
    mask = n > 0
    tail_energy = float(np.sum(mags2[mask] * lam[mask]))
    coeff_sup = float(np.sqrt(np.max(mags2[mask]))) if np.any(mask) else 0.0

    # fitted log-log slope of the coefficient envelope over the top octave
    pos = np.abs(psi.coeffs[psi.degree + 1 :])
    top = pos[N // 2 :]
    idxs = np.arange(N // 2, N) + 1.0
    good = top > 0
    if np.count_nonzero(good) > 8:
        slope = float(
            np.polyfit(np.log(idxs[good]), np.log(top[good]), 1)[0]
        )
    else:
        slope = 0.0

    decay_claim = loc.params.M + 2
    passes = {
        "grid_min": grid_min >= tols.psi_min,
        "grid_max": grid_max <= 1.0 + eps + tols.psi_range_slack,
        "deleted_arc": arc_len > 0.0 and residual <= tols.tau_supp,
        "mean": mean_coeff == 1.0,
        "coeff_sup": coeff_sup <= eps + tols.coeff_sup_slack,
        "coeff_decay": slope <= -decay_claim + 0.5,
        "tail_energy": tail_energy <= eps**2,
    }
    return LocalizerReport(
        grid_min=grid_min,
        grid_max=grid_max,
        deleted_arc_len=arc_len,
        deleted_arc_residual=residual,
        mean_coeff=mean_coeff,
        coeff_sup=coeff_sup,
        tail_energy=tail_energy,
        decay_slope=slope,
        passes=passes,
    )
