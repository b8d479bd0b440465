"""Building blocks: mean-zero plateau polynomials with controlled floor.

A block g for parameters (eta, M, S) is a real trigonometric polynomial
with

* g = 1 on an arc around t = 0 of radius proportional to eta,
* -1/S <= g <= 1 everywhere (floor verified on the grid),
* coefficient 0 exactly zero,
* a two-sided coefficient envelope |g^(n)| <= eta * A * min((eta n)^M,
  (eta n)^-M) with the constant A measured, never assumed.

Construction: a narrow plateau bump at scale rho_0 = delta0 * eta is
corrected by L = ceil(M/2) wider plateau bumps whose weights cancel the
odd moments rho^1, rho^3, ..., rho^(2L-1).  Cancelling those moments
forces the coefficient sum to vanish to order 2L >= M at n = 0, while
every correction kernel is exactly constant on the central plateau, so
the plateau survives the correction exactly.  The widths double per
scale and the first ratio rho_1/rho_0 = gamma * (S+1) controls the
depth of the negative excursion; gamma is escalated until the exact
lower bound sum(min(c_j, 0)) / (sum c_j) clears -1/S with margin.
The widest scale is always eta/2, so the construction fits the circle
for every eta < 1/2.

The function is sampled on an internal grid fine enough to resolve
rho_0 and transformed; sampling (rather than truncating an ideal
series) keeps the measured floor and plateau exact on the grid, at the
price of a tiny, quantified aliasing perturbation of the coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fourier import (
    CoeffVector,
    GridFunction,
    dft,
    idft,
    is_power_of_two,
    next_power_of_two,
)
from .tolerances import DEFAULT_TOLS, Tolerances

__all__ = [
    "Block",
    "BlockReport",
    "BlockConstructionError",
    "build_block",
    "verify_block",
    "block_sweep",
]

RES_FACTOR = 64          # grid points across the finest scale
G_BUILD_MAX = 1 << 24    # hard cap on the internal sampling grid
_GAMMA0 = {1: 1.10, 2: 1.45, 3: 1.80}
_FLOOR_SAFETY = 0.995    # design floor must clear -FLOOR_SAFETY/S


class BlockConstructionError(RuntimeError):
    def __init__(self, message: str, report: "BlockReport | None" = None):
        super().__init__(message)
        self.report = report


@dataclass
class Block:
    eta: float
    M: int
    S: int
    poly: CoeffVector
    scales: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    plateau_radius: float = 0.0
    G_build: int = 0

    @property
    def degree(self) -> int:
        return self.poly.degree


@dataclass
class BlockReport:
    flat_radius_meas: float
    floor_meas: float
    sup_meas: float
    A_meas: float
    mean_coeff: complex
    tau_flat: float
    tau_floor: float
    accepted: bool
    reasons: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "flat_radius_meas": self.flat_radius_meas,
            "floor_meas": self.floor_meas,
            "sup_meas": self.sup_meas,
            "A_meas": self.A_meas,
            "mean_coeff": [self.mean_coeff.real, self.mean_coeff.imag],
            "tau_flat": self.tau_flat,
            "tau_floor": self.tau_floor,
            "accepted": self.accepted,
            "reasons": self.reasons,
        }


# ---------------------------------------------------------------------------
# plateau profile


def _smoothstep_coeffs(p: int) -> np.ndarray:
    """Polynomial s(t) = t^(p+1) * sum_k binom(p+k,k) binom(2p+1,p-k) (-t)^k.

    Classic order-p smoothstep: s(0)=0, s(1)=1, first p derivatives
    vanish at both ends.
    """
    coeffs = np.zeros(2 * p + 2)
    for k in range(p + 1):
        coeffs[p + 1 + k] = (
            math.comb(p + k, k) * math.comb(2 * p + 1, p - k) * (-1.0) ** k
        )
    return coeffs


def _profile(dist_over_rho: np.ndarray, p: int) -> np.ndarray:
    """Plateau profile: 1 for x <= 1/2, 0 for x >= 3/2, smoothstep between."""
    x = dist_over_rho
    out = np.zeros_like(x)
    out[x <= 0.5] = 1.0
    mid = (x > 0.5) & (x < 1.5)
    if np.any(mid):
        t = 1.5 - x[mid]
        coeffs = _smoothstep_coeffs(p)
        acc = np.zeros_like(t)
        for c in coeffs[::-1]:
            acc = acc * t + c
        out[mid] = acc
    return out


def _moment_weights(scales: np.ndarray) -> np.ndarray:
    """Solve sum_j c_j rho_j^(2i+1) = 0 for i = 0..L-1 with c_0 = 1."""
    L = len(scales) - 1
    if L == 0:
        return np.ones(1)
    # scale columns by rho_1^(2i+1) for conditioning
    r = scales / scales[1]
    A = np.empty((L, L))
    b = np.empty(L)
    for i in range(L):
        A[i, :] = r[1:] ** (2 * i + 1)
        b[i] = -(r[0] ** (2 * i + 1))
    return np.concatenate([[1.0], np.linalg.solve(A, b)])


def _design(eta: float, M: int, S: int):
    """Choose scales and weights; returns (scales, weights, design_floor)."""
    L = max(1, math.ceil(M / 2))
    gamma = _GAMMA0.get(L, 2.0)
    for _ in range(24):
        # rho_L is pinned to eta/2; gamma trades plateau width for depth
        rho0 = eta / (2.0**L * gamma * (S + 1))
        scales = np.array(
            [rho0] + [gamma * (S + 1) * rho0 * 2.0 ** (j - 1) for j in range(1, L + 1)]
        )
        weights = _moment_weights(scales)
        plateau = float(np.sum(weights))
        floor = float(np.sum(np.minimum(weights, 0.0))) / plateau
        if plateau > 0 and floor >= -_FLOOR_SAFETY / S:
            return scales, weights, floor
        gamma *= 1.15
    raise BlockConstructionError(
        f"no admissible weight design for eta={eta}, M={M}, S={S}"
    )


# ---------------------------------------------------------------------------
# build + verify


def build_block(
    eta: float,
    M: int,
    S: int,
    G: int,
    tols: Tolerances = DEFAULT_TOLS,
    trim_l1: float = 1e-12,
) -> tuple[Block, BlockReport]:
    """Construct and verify a block; raises BlockConstructionError on failure.

    G is the caller's resolution floor (must satisfy G >= 64/eta); the
    sampling grid is refined internally until the finest scale is
    resolved, and doubled up to three more times if verification fails.
    """
    if not (0.0 < eta < 0.5):
        raise ValueError(f"eta must lie in (0, 1/2), got {eta}")
    if M < 1 or S < 1:
        raise ValueError("M and S must be positive integers")
    if not is_power_of_two(G):
        raise ValueError(f"grid size {G} is not a power of two")
    if G < 64 / eta:
        raise ValueError(f"grid {G} too coarse to resolve eta={eta} (need G >= 64/eta)")

    scales, weights, _ = _design(eta, M, S)
    rho0 = scales[0]
    G_build = next_power_of_two(max(G, int(math.ceil(RES_FACTOR / rho0))))
    if G_build > G_BUILD_MAX:
        raise BlockConstructionError(
            f"finest scale {rho0:.3e} needs a sampling grid beyond {G_BUILD_MAX}"
        )

    last_report = None
    for _ in range(4):
        block = _sample_block(eta, M, S, scales, weights, G_build, trim_l1)
        report = verify_block(block, tols.tau_flat, tols.tau_floor, tols=tols)
        if report.accepted:
            return block, report
        last_report = report
        G_build *= 2
        if G_build > G_BUILD_MAX:
            break
    raise BlockConstructionError(
        f"block eta={eta} M={M} S={S} failed verification: {last_report.reasons}",
        last_report,
    )


def _sample_block(
    eta: float,
    M: int,
    S: int,
    scales: np.ndarray,
    weights: np.ndarray,
    G_build: int,
    trim_l1: float,
) -> Block:
    k = np.arange(G_build)
    dist = np.minimum(k, G_build - k) / G_build
    p = M + 3
    samples = np.zeros(G_build)
    for rho, c in zip(scales, weights):
        samples += c * _profile(dist / rho, p)
    plateau_val = float(np.sum(weights))
    samples /= plateau_val

    coeffs = dft(GridFunction(samples))
    N = coeffs.degree
    coeffs.coeffs[N] = 0.0  # exact mean zero
    poly = coeffs.enforce_real()
    poly = _trim_by_l1(poly, trim_l1)
    return Block(
        eta=eta,
        M=M,
        S=S,
        poly=poly,
        scales=scales,
        weights=weights,
        plateau_radius=scales[0] / 2.0,
        G_build=G_build,
    )


def _trim_by_l1(c: CoeffVector, budget: float) -> CoeffVector:
    """Drop the outermost coefficients whose total |c| stays under budget."""
    N = c.degree
    mags = np.abs(c.coeffs[N:]) + np.abs(c.coeffs[: N + 1][::-1])
    suffix = np.cumsum(mags[::-1])[::-1]
    keep = np.nonzero(suffix > budget)[0]
    new_deg = int(keep[-1]) if len(keep) else 0
    if new_deg >= N:
        return c
    out = c.trimmed(max(new_deg, 1))
    out.real_valued = c.real_valued
    return out


def verify_block(
    b: Block,
    tau_flat: float | None = None,
    tau_floor: float | None = None,
    delta_min: float | None = None,
    tols: Tolerances = DEFAULT_TOLS,
) -> BlockReport:
    """Measure the four block quantities on the grid and in coefficients.

    Acceptance: flat radius at least delta_min * eta (default: a quarter
    of the designed plateau), floor above -1/S - tau_floor, sup below
    1 + slack, finite A_meas below the configured ceiling, exact zero
    mean.
    """
    tau_flat = tols.tau_flat if tau_flat is None else tau_flat
    tau_floor = tols.tau_floor if tau_floor is None else tau_floor
    if delta_min is None:
        delta_min = 0.25 * b.plateau_radius / b.eta if b.plateau_radius > 0 else 1e-9

    G_eval = next_power_of_two(2 * b.poly.degree + 2)
    g = idft(b.poly, G_eval).real()

    floor_meas = float(np.min(g))
    sup_meas = float(np.max(g))

    # maximal run of consecutive grid points around 0 with |g - 1| <= tau
    flat = np.abs(g - 1.0) <= tau_flat
    radius = 0.0
    if flat[0]:
        kmax = 0
        while kmax + 1 < G_eval // 2 and flat[kmax + 1] and flat[G_eval - kmax - 1]:
            kmax += 1
        radius = kmax / G_eval

    N = b.poly.degree
    n = np.arange(1, N + 1).astype(np.float64)
    env = b.eta * np.minimum((b.eta * n) ** b.M, (b.eta * n) ** (-b.M))
    mags = np.maximum(np.abs(b.poly.coeffs[N + 1 :]), np.abs(b.poly.coeffs[:N][::-1]))
    A_meas = float(np.max(mags / env)) if N >= 1 else math.inf

    mean_coeff = b.poly.at(0)
    reasons = []
    if mean_coeff != 0:
        reasons.append("mean coefficient is not exactly zero")
    if radius < delta_min * b.eta:
        reasons.append(
            f"flat radius {radius:.3e} below delta_min*eta = {delta_min * b.eta:.3e}"
        )
    if floor_meas < -1.0 / b.S - tau_floor:
        reasons.append(f"floor {floor_meas:.3e} below -1/S - tau = {-1.0/b.S - tau_floor:.3e}")
    if sup_meas > 1.0 + tols.block_sup_slack:
        reasons.append(f"sup {sup_meas} above 1 + slack")
    if not np.isfinite(A_meas) or A_meas > tols.a_max:
        reasons.append(f"A_meas {A_meas:.3e} not finite below {tols.a_max:.1e}")
    return BlockReport(
        flat_radius_meas=radius,
        floor_meas=floor_meas,
        sup_meas=sup_meas,
        A_meas=A_meas,
        mean_coeff=mean_coeff,
        tau_flat=tau_flat,
        tau_floor=tau_floor,
        accepted=not reasons,
        reasons=reasons,
    )


def block_sweep(etas, Ms, Ss, G: int, tols: Tolerances = DEFAULT_TOLS) -> list[dict]:
    """Build the full (eta, M, S) grid; returns one record per combination."""
    records = []
    for M in Ms:
        for S in Ss:
            for eta in etas:
                block, report = build_block(eta, M, S, G, tols=tols)
                records.append(
                    {
                        "eta": eta,
                        "M": M,
                        "S": S,
                        "degree": block.degree,
                        "G_build": block.G_build,
                        "report": report,
                    }
                )
    return records
