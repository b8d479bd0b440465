"""Pairs (function, compact set), the deletion step, and finite runs.

The metric space under study pairs a nonnegative bounded function f
(coefficients in l2(w)) with a compact grid set E containing its
numerical support, under the metric

    d((f,E),(g,K)) = hausdorff(E,K) + ||f-g||_{l2(w)}.

A deletion step multiplies f by a localizer rotated to a target point a
and removes the localizer's dead arc from E, killing the support near a
at a small metric cost.  A run iterates deletion steps over a list of
points under a per-step budget schedule, searching epsilon by halving;
budgets below the feasibility frontier of the localizer construction
are handled best-effort and recorded, or raised in strict mode.

Compact sets are grid-resolved: a set is a boolean mask over the grid,
arcs are runs of set points, and the Hausdorff distance is computed
from exact nearest-point index distances.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fourier import (
    CoeffVector,
    add,
    fejer_mean,
    idft,
    next_power_of_two,
    pointwise_product,
    rotate,
    weighted_norm,
)
from .localizer import Localizer, LocalizerBuildError, build_localizer
from .tolerances import DEFAULT_TOLS, Tolerances
from .weights import WeightSequence

__all__ = [
    "CompactSet",
    "PairState",
    "StepRecord",
    "DeletionTrace",
    "BudgetError",
    "hausdorff_distance",
    "pair_metric",
    "prepare",
    "deletion_step",
    "run_baire",
    "numerical_support",
]


class BudgetError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# compact grid sets


@dataclass(frozen=True)
class CompactSet:
    mask: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mask", np.asarray(self.mask, dtype=bool))

    @classmethod
    def full_circle(cls, G: int) -> "CompactSet":
        return cls(np.ones(G, dtype=bool))

    @classmethod
    def from_indices(cls, G: int, indices) -> "CompactSet":
        m = np.zeros(G, dtype=bool)
        m[np.asarray(indices, dtype=int) % G] = True
        return cls(m)

    @property
    def G(self) -> int:
        return len(self.mask)

    @property
    def is_empty(self) -> bool:
        return not bool(np.any(self.mask))

    @property
    def is_full(self) -> bool:
        return bool(np.all(self.mask))

    def size(self) -> int:
        return int(np.count_nonzero(self.mask))

    def arcs(self) -> list[tuple[int, int]]:
        """Runs of set points as inclusive index pairs, wrap-merged."""
        m = self.mask
        G = len(m)
        if not m.any():
            return []
        if m.all():
            return [(0, G - 1)]
        diff = np.diff(m.astype(np.int8))
        starts = (np.nonzero(diff == 1)[0] + 1).tolist()
        ends = np.nonzero(diff == -1)[0].tolist()
        if m[0]:
            starts = [0] + starts
        if m[-1]:
            ends = ends + [G - 1]
        arcs = list(zip(starts, ends))
        # merge a run that wraps midnight
        if m[0] and m[-1] and len(arcs) > 1:
            first, last = arcs[0], arcs[-1]
            arcs = arcs[1:-1] + [(last[0], first[1])]
        return arcs

    def remove_open_arc(self, center: float, length: float) -> "CompactSet":
        """Remove grid points strictly inside the open arc (center +- length/2)."""
        G = len(self.mask)
        t = np.arange(G) / G
        d = np.abs(((t - center) + 0.5) % 1.0 - 0.5)
        out = self.mask.copy()
        out[d < length / 2.0] = False
        return CompactSet(out)

    def subset_of(self, other: "CompactSet") -> bool:
        return bool(np.all(other.mask[self.mask]))

    def contains_index(self, k: int) -> bool:
        return bool(self.mask[k % len(self.mask)])


def _nearest_index_dist(s: CompactSet) -> np.ndarray:
    """Circular index distance from every grid point to the set."""
    idx = np.nonzero(s.mask)[0]
    if len(idx) == 0:
        raise ValueError("distance to the empty set is undefined")
    G = s.G
    ext = np.concatenate([idx - G, idx, idx + G])
    p = np.arange(G)
    pos = np.searchsorted(ext, p)
    left = np.abs(p - ext[np.maximum(pos - 1, 0)])
    right = np.abs(ext[np.minimum(pos, len(ext) - 1)] - p)
    return np.minimum(left, right)


def hausdorff_distance(E: CompactSet, K: CompactSet) -> float:
    """sup_{z in E} dist(z, K) + sup_{x in K} dist(x, E), circumference 1."""
    if E.is_empty or K.is_empty:
        raise ValueError("the space of compact sets excludes the empty set")
    if E.G != K.G:
        raise ValueError("compact sets live on different grids")
    d_to_K = _nearest_index_dist(K)
    d_to_E = _nearest_index_dist(E)
    part1 = int(np.max(d_to_K[E.mask]))
    part2 = int(np.max(d_to_E[K.mask]))
    return (part1 + part2) / E.G


# ---------------------------------------------------------------------------
# pairs


@dataclass
class PairState:
    f: CoeffVector
    E: CompactSet
    budget_spent: float = 0.0

    def validate(self, tols: Tolerances = DEFAULT_TOLS) -> list[str]:
        """Invariant check: range on the grid and support containment."""
        problems = []
        G_fine = next_power_of_two(2 * self.f.degree + 2)
        samples = idft(self.f, max(G_fine, self.E.G)).real()
        lo, hi = float(np.min(samples)), float(np.max(samples))
        if lo < -tols.range_slack or hi > 2.0 + tols.range_slack:
            problems.append(f"range [{lo:.3e}, {hi:.3e}] leaves [0, 2]")
        supp = numerical_support(self.f, self.E.G, tols.tau_supp)
        if not supp.is_empty and not supp.subset_of(self.E):
            problems.append("numerical support escapes the compact set")
        return problems


def pair_metric(p: PairState, q: PairState, w: WeightSequence) -> float:
    diff = add(p.f, q.f, scale=-1.0)
    return hausdorff_distance(p.E, q.E) + weighted_norm(diff, w).value


def prepare(f_raw: CoeffVector, delta: float, K_fejer: int) -> CoeffVector:
    """Smooth and shrink: (1 - delta/2) * fejer_mean(f_raw, K_fejer).

    Requires 0 <= f_raw <= 2 on the grid; the output range lands in
    [0, 2 - delta] because the taper is an average with positive
    weights.
    """
    G = next_power_of_two(2 * f_raw.degree + 2)
    vals = idft(f_raw, G).real()
    if float(np.min(vals)) < -1e-12 or float(np.max(vals)) > 2.0 + 1e-12:
        raise ValueError("prepare expects 0 <= f <= 2 on the grid")
    out = fejer_mean(f_raw, K_fejer)
    out.coeffs *= 1.0 - delta / 2.0
    return out


def numerical_support(f: CoeffVector, G: int, tau_supp: float) -> CompactSet:
    """Grid points where |f| exceeds tau_supp, as a compact grid set."""
    G_fine = max(next_power_of_two(2 * f.degree + 2), G)
    samples = idft(f, G_fine).samples
    stride = G_fine // G
    sub = samples[::stride]
    return CompactSet(np.abs(sub) > tau_supp)


# ---------------------------------------------------------------------------
# deletion steps


@dataclass
class StepRecord:
    a_index: int
    epsilon: float
    eps_work: float
    budget: float
    budget_met: bool
    d_increment: float
    hausdorff_part: float
    l2_part: float
    discarded_energy: float
    renorm_offset: float
    arc_len: float
    degree_after: int
    points_dead: bool = True
    halvings: int = 0

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class DeletionTrace:
    records: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    total_increment: float = 0.0
    final_support_arcs: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "records": [r.as_dict() for r in self.records],
            "total_increment": self.total_increment,
            "final_support_arcs": [list(a) for a in self.final_support_arcs],
        }


def deletion_step(
    p: PairState,
    a_index: int,
    epsilon: float,
    w: WeightSequence,
    G: int,
    loc: Localizer | None = None,
    tols: Tolerances = DEFAULT_TOLS,
    budget: float = float("inf"),
    dead_points: list[int] | None = None,
) -> tuple[PairState, StepRecord]:
    """Multiply by the localizer rotated to a, delete its dead arc from E."""
    if loc is None:
        loc = build_localizer(w, epsilon, G, tols=tols)
    a = (a_index % G) / G
    psi_rot = rotate(loc.psi, a)
    psi_rot.real_valued = True

    product = pointwise_product(p.f, psi_rot)
    kept, discarded_energy = _chop(product, w, tols.chop_l1_per_step)

    # the localizer has exact mean 1 but the product picks up a cross
    # term, so the mean is restored by a scalar (offset recorded)
    old_mean = p.f.at(0)
    new_mean = kept.at(0)
    renorm_offset = 0.0
    if new_mean != 0:
        factor = (old_mean / new_mean).real
        kept.coeffs *= factor
        kept.coeffs[kept.degree] = old_mean
        renorm_offset = abs(factor - 1.0)
    kept = kept.enforce_real()
    kept.coeffs[kept.degree] = old_mean

    G_chk = max(next_power_of_two(2 * kept.degree + 2), G)
    vals = idft(kept, G_chk).real()
    hi = float(np.max(vals))
    if hi > 2.0 * (1.0 + epsilon) + tols.range_slack:
        raise RuntimeError(
            f"range blew past 2(1+eps): max {hi:.6f}; localizer defect suspected"
        )
    points_dead = True
    if dead_points:
        stride = G_chk // G
        for pt in dead_points:
            if abs(vals[(pt % G) * stride]) > tols.tau_supp:
                points_dead = False
                break

    E_new = p.E.remove_open_arc(a, loc.report.deleted_arc_len)
    if E_new.is_empty:
        raise RuntimeError("deletion emptied the compact set")

    diff = add(kept, p.f, scale=-1.0)
    l2_part = weighted_norm(diff, w).value + np.sqrt(discarded_energy)
    hausdorff_part = hausdorff_distance(p.E, E_new)
    d_increment = hausdorff_part + l2_part

    new_pair = PairState(f=kept, E=E_new, budget_spent=p.budget_spent + d_increment)
    record = StepRecord(
        a_index=a_index % G,
        epsilon=epsilon,
        eps_work=loc.params.eps_work,
        budget=budget,
        budget_met=d_increment <= budget,
        d_increment=d_increment,
        hausdorff_part=hausdorff_part,
        l2_part=l2_part,
        discarded_energy=discarded_energy,
        renorm_offset=renorm_offset,
        arc_len=loc.report.deleted_arc_len,
        degree_after=kept.degree,
        points_dead=points_dead,
    )
    return new_pair, record


def _chop(c: CoeffVector, w: WeightSequence, l1_budget: float) -> tuple[CoeffVector, float]:
    """Trim the coefficient tail under an l1 budget; return weighted loss."""
    N = c.degree
    mags = np.abs(c.coeffs[N:]) + np.abs(c.coeffs[:N + 1][::-1])
    suffix = np.cumsum(mags[::-1])[::-1]
    keep = np.nonzero(suffix > l1_budget)[0]
    new_deg = int(keep[-1]) if len(keep) else 1
    if new_deg >= N:
        return c, 0.0
    lam = w.values(N)
    dropped = np.arange(new_deg + 1, N + 1)
    e = np.abs(c.coeffs[N + dropped]) ** 2 + np.abs(c.coeffs[N - dropped]) ** 2
    discarded = float(np.sum(e * lam[dropped]))
    out = c.trimmed(new_deg)
    out.real_valued = c.real_valued
    return out, discarded


def run_baire(
    f0: CoeffVector,
    E0: CompactSet,
    points: list[int],
    budgets: list[float],
    w: WeightSequence,
    G: int,
    eps_init: float = 0.2,
    max_halvings: int = 12,
    strict: bool = False,
    keep_snapshots: bool = False,
    prepare_delta: float = 0.1,
    prepare_K: int = 64,
    tols: Tolerances = DEFAULT_TOLS,
) -> tuple[PairState, DeletionTrace]:
    """Run deletion steps at the given grid points under per-step budgets.

    Each step searches epsilon by halving until its measured increment
    fits the step budget.  When the search bottoms out at the
    construction's feasibility frontier the step keeps its best
    achieved increment and is recorded with budget_met = False; in
    strict mode that raises BudgetError instead.  Previously deleted
    points must stay dead (below tau_supp) for a candidate to be
    accepted.
    """
    if len(points) != len(budgets):
        raise ValueError("points and budgets must have equal length")
    if any(b <= 0 for b in budgets):
        raise ValueError("budgets must be positive")

    pair = PairState(f=prepare(f0, prepare_delta, prepare_K), E=E0)
    trace = DeletionTrace()
    if keep_snapshots:
        trace.snapshots.append((pair.f.copy(), CompactSet(pair.E.mask.copy())))
    cache: dict[float, Localizer] = {}
    eps_start = eps_init

    for k, (a_idx, budget) in enumerate(zip(points, budgets)):
        eps = eps_start
        best: tuple[PairState, StepRecord] | None = None
        f_norm = weighted_norm(pair.f, w).value
        halvings = 0
        while True:
            loc = cache.get(eps, False)
            if loc is False:
                try:
                    loc = build_localizer(w, eps, G, tols=tols)
                except LocalizerBuildError:
                    loc = None
                cache[eps] = loc
            # a cheap lower-estimate of the step cost skips materializing
            # products at epsilons that cannot meet the budget anyway
            predicted = (
                0.5 * f_norm * np.sqrt(loc.report.tail_energy)
                if loc is not None
                else np.inf
            )
            if loc is not None and (predicted <= budget or best is None):
                cand_pair, cand_rec = deletion_step(
                    pair, a_idx, eps, w, G,
                    loc=loc, tols=tols, budget=budget, dead_points=points[:k],
                )
                cand_rec.halvings = halvings
                if cand_rec.points_dead:
                    if best is None or cand_rec.d_increment < best[1].d_increment:
                        best = (cand_pair, cand_rec)
                    if cand_rec.d_increment <= budget:
                        break
            if loc is None and best is not None:
                break  # feasibility frontier reached with a usable fallback
            halvings += 1
            if halvings > max_halvings:
                break
            eps /= 2.0
        if best is None:
            raise BudgetError(f"step {k} at grid index {a_idx}: no feasible deletion")
        if strict and not best[1].budget_met:
            raise BudgetError(
                f"step {k} at grid index {a_idx}: increment "
                f"{best[1].d_increment:.4g} exceeds budget {budget:.4g} "
                f"after {best[1].halvings} halvings"
            )
        pair, rec = best
        # budgets shrink along a schedule, so the next search starts
        # where this one ended instead of re-probing large epsilons
        eps_start = rec.epsilon
        trace.records.append(rec)
        trace.total_increment += rec.d_increment
        if keep_snapshots:
            trace.snapshots.append((pair.f.copy(), CompactSet(pair.E.mask.copy())))

    support = numerical_support(pair.f, G, tols.tau_supp)
    trace.final_support_arcs = support.arcs()
    return pair, trace
