import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wl2lab.baire import (
    BudgetError,
    CompactSet,
    PairState,
    deletion_step,
    hausdorff_distance,
    numerical_support,
    pair_metric,
    prepare,
    run_baire,
)
from wl2lab.fourier import CoeffVector, fejer_mean, idft, rotate
from wl2lab.localizer import build_localizer
from wl2lab.weights import power_weight


# ---------------------------------------------------------------------------
# compact sets and the metric


def test_hausdorff_identical_sets():
    E = CompactSet.from_indices(64, [3, 4, 5, 30])
    assert hausdorff_distance(E, E) == 0.0


def test_hausdorff_antipodal_points():
    E = CompactSet.from_indices(8, [0])
    K = CompactSet.from_indices(8, [4])
    assert hausdorff_distance(E, K) == 1.0


def test_hausdorff_containment_one_sided():
    K = CompactSet.from_indices(32, range(0, 16))
    E = CompactSet.from_indices(32, [0])
    d = hausdorff_distance(E, K)
    # E in K: first sup vanishes, second is the farthest K point from 0
    assert d == 15 / 32


def test_hausdorff_rejects_empty():
    with pytest.raises(ValueError, match="empty"):
        hausdorff_distance(CompactSet.from_indices(8, []), CompactSet.full_circle(8))


def test_arcs_normalization_and_wrap():
    s = CompactSet.from_indices(16, [14, 15, 0, 1, 7, 8])
    assert sorted(s.arcs()) == [(7, 8), (14, 1)]
    assert CompactSet.full_circle(8).arcs() == [(0, 7)]


def test_remove_open_arc_keeps_closed_ends():
    s = CompactSet.full_circle(16).remove_open_arc(0.5, 4 / 16)
    # points strictly inside (6/16, 10/16) go; 7, 8, 9 out
    assert not s.contains_index(8) and not s.contains_index(7)
    assert s.contains_index(6) and s.contains_index(10)


def test_pair_metric_zero_and_hand_value():
    w = power_weight(0.0)
    f = CoeffVector.delta(0, 1.0)
    E = CompactSet.full_circle(64)
    p = PairState(f=f, E=E)
    assert pair_metric(p, p, w) == 0.0
    g = CoeffVector.zeros(1)
    g.coeffs[:] = [1.0, 1.0, 1.0]  # f + modes at -1, +1
    q = PairState(f=CoeffVector(g.coeffs.copy()), E=E)
    assert abs(pair_metric(p, q, w) - np.sqrt(2.0)) < 1e-12


@settings(max_examples=25, deadline=None, derandomize=True)
@given(seed=st.integers(min_value=0, max_value=2**31))
def test_pair_metric_triangle_inequality(seed):
    rng = np.random.default_rng(seed)
    w = power_weight(0.5)
    G = 64

    def rand_pair():
        f = CoeffVector(rng.normal(size=9) + 1j * rng.normal(size=9)).enforce_real()
        pts = rng.choice(G, size=rng.integers(1, 10), replace=False)
        return PairState(f=f, E=CompactSet.from_indices(G, pts))

    a, b, c = rand_pair(), rand_pair(), rand_pair()
    assert pair_metric(a, c, w) <= pair_metric(a, b, w) + pair_metric(b, c, w) + 1e-10
    assert abs(pair_metric(a, b, w) - pair_metric(b, a, w)) == 0.0


# ---------------------------------------------------------------------------
# prepare and numerical support


def test_prepare_constant():
    out = prepare(CoeffVector.delta(0, 1.0), 0.1, 32)
    assert out.at(0) == 0.95
    assert out.degree == 0


def test_prepare_range_containment():
    rng = np.random.default_rng(3)
    raw = fejer_mean(
        CoeffVector(rng.normal(size=33) + 1j * rng.normal(size=33)).enforce_real(), 16
    )
    vals = idft(raw, 128).real()
    shift = vals.min()
    scale = 1.9 / (vals.max() - shift)
    adm = CoeffVector(raw.coeffs * scale)
    adm.coeffs[adm.degree] += -shift * scale
    out = prepare(adm, 0.2, 16)
    out_vals = idft(out, 128).real()
    assert out_vals.min() >= -1e-12
    assert out_vals.max() <= 1.8 + 1e-12


def test_prepare_rejects_out_of_range():
    with pytest.raises(ValueError, match="0 <= f <= 2"):
        prepare(CoeffVector.delta(0, 3.0), 0.1, 8)


def test_prepare_converges_as_fejer_degree_grows():
    rng = np.random.default_rng(4)
    raw = CoeffVector(rng.normal(size=17) + 1j * rng.normal(size=17)).enforce_real()
    vals = idft(raw, 64).real()
    # normalize into [0.1, 1.9] so prepare's precondition holds
    f = CoeffVector(raw.coeffs * (1.8 / (vals.max() - vals.min())))
    f.coeffs[f.degree] += 0.1 - vals.min() * 1.8 / (vals.max() - vals.min())
    dists = []
    for K in (8, 32, 128, 512):
        out = prepare(f, 0.1, K)
        diff = out.coeffs - 0.95 * f.coeffs[
            f.degree - out.degree : f.degree + out.degree + 1
        ]
        dists.append(np.linalg.norm(diff))
    assert dists == sorted(dists, reverse=True)
    assert dists[-1] < 1e-12


def test_numerical_support_constant_and_bump():
    assert numerical_support(CoeffVector.delta(0, 1.0), 64, 1e-7).is_full
    bump = fejer_mean(CoeffVector.delta(0, 1.0), 64)  # Fejer kernel, one arc
    c = CoeffVector.zeros(64)
    kernel = np.maximum(0.0, 1.0 - np.abs(np.arange(-64, 65)) / 65.0)
    c.coeffs[:] = kernel
    supp = numerical_support(c, 4096, 1e-7)
    assert not supp.is_empty
    assert len(supp.arcs()) == 1


def test_numerical_support_empty_flag():
    s = numerical_support(CoeffVector.zeros(4), 64, 1e-7)
    assert s.is_empty


# ---------------------------------------------------------------------------
# deletion steps


def test_deletion_step_annihilates_zero():
    w = power_weight(0.5)
    G = 4096
    loc = build_localizer(w, 0.2, G)
    p = PairState(f=CoeffVector.zeros(4), E=CompactSet.full_circle(G))
    q, rec = deletion_step(p, 123, 0.2, w, G, loc=loc)
    assert np.all(q.f.coeffs == 0.0)
    assert q.E.size() <= p.E.size()


def test_deletion_step_constant_becomes_rotated_localizer():
    w = power_weight(0.5)
    G = 4096
    loc = build_localizer(w, 0.2, G)
    p = PairState(f=CoeffVector.delta(0, 1.0), E=CompactSet.full_circle(G))
    a = G // 3
    q, rec = deletion_step(p, a, 0.2, w, G, loc=loc)
    assert q.f.at(0) == 1.0  # mean preserved through the step
    expected = rotate(loc.psi, a / G)
    common = min(q.f.degree, expected.degree)
    got = q.f.coeffs[q.f.degree - common : q.f.degree + common + 1]
    want = expected.coeffs[expected.degree - common : expected.degree + common + 1]
    assert np.max(np.abs(got - want)) < 1e-10


def test_deletion_increments_decrease_with_epsilon():
    w = power_weight(0.5)
    G = 4096
    p = PairState(f=prepare(CoeffVector.delta(0, 1.0), 0.1, 32),
                  E=CompactSet.full_circle(G))
    incs = []
    for eps in (0.4, 0.2, 0.1):
        loc = build_localizer(w, eps, G)
        _, rec = deletion_step(p, 0, eps, w, G, loc=loc)
        incs.append(rec.d_increment)
    assert incs == sorted(incs, reverse=True)


# ---------------------------------------------------------------------------
# runs


@pytest.fixture(scope="module")
def short_run():
    w = power_weight(0.5)
    G = 4096
    pts = [0, G // 3, 2 * G // 3]
    buds = [0.5, 0.25, 0.125]
    pair, trace = run_baire(
        CoeffVector.delta(0, 1.0), CompactSet.full_circle(G), pts, buds, w, G,
        keep_snapshots=True,
    )
    return w, G, pts, buds, pair, trace


def test_run_zero_steps_returns_prepared_pair():
    w = power_weight(0.5)
    G = 256
    pair, trace = run_baire(
        CoeffVector.delta(0, 1.0), CompactSet.full_circle(G), [], [], w, G
    )
    assert pair.f.at(0) == 0.95
    assert pair.E.is_full
    assert trace.records == []


def test_run_meets_budgets_and_preserves_mean(short_run):
    w, G, pts, buds, pair, trace = short_run
    assert all(r.budget_met for r in trace.records)
    assert abs(pair.f.at(0) - 0.95) <= 1e-9
    assert trace.total_increment <= sum(buds) + 1e-9


def test_run_supports_nested_and_points_dead(short_run):
    w, G, pts, buds, pair, trace = short_run
    masks = [snap[1] for snap in trace.snapshots]
    for earlier, later in zip(masks, masks[1:]):
        assert later.subset_of(earlier)
    supp = numerical_support(pair.f, G, 1e-7)
    for a in pts:
        assert not supp.contains_index(a)
    assert supp.subset_of(pair.E)


def test_run_trace_recompute_matches(short_run):
    w, G, pts, buds, pair, trace = short_run
    for k, rec in enumerate(trace.records):
        p0 = PairState(*trace.snapshots[k])
        p1 = PairState(*trace.snapshots[k + 1])
        d = pair_metric(p0, p1, w)
        # the trace adds the discarded-tail bound on top of the exact metric
        assert d <= rec.d_increment + 1e-10
        assert abs(d - (rec.d_increment - np.sqrt(rec.discarded_energy))) < 1e-10


def test_openness_witness(short_run):
    w, G, pts, buds, pair, trace = short_run
    # the run avoids an arc around each point; perturbing E within
    # hausdorff radius delta/2 cannot reach back inside the half arc
    supp = numerical_support(pair.f, G, 1e-7)
    gaps = {a: 0 for a in pts}
    for a in pts:
        k = 1
        while not supp.contains_index(a + k) and not supp.contains_index(a - k):
            k += 1
        gaps[a] = k
    delta = min(gaps.values()) / G
    rng = np.random.default_rng(0)
    for _ in range(5):
        radius = int(delta / 2 * G)
        shift = rng.integers(-radius, radius + 1)
        perturbed = CompactSet(np.roll(pair.E.mask, shift))
        assert hausdorff_distance(pair.E, perturbed) <= delta / 2 + 1e-12
        for a in pts:
            # the half arc around každý point stays clear
            lo = int(np.floor(delta / 4 * G))
            for off in range(-lo, lo + 1):
                if perturbed.contains_index(a + off):
                    # perturbation may reoccupy only beyond the half arc
                    assert abs(off) >= gaps[a] - radius
    assert delta > 0


def test_closedness_witness():
    # a convergent sequence of admissible pairs keeps its limit in range
    w = power_weight(0.5)
    G = 512
    base = prepare(CoeffVector.delta(0, 2.0), 0.05, 64)
    seq = []
    for m in (1, 2, 4, 8, 16):
        f = base.copy()
        f.coeffs *= 1.0 - 1.0 / (8 * m)
        seq.append(PairState(f=f, E=CompactSet.full_circle(G)))
    for a, b in zip(seq, seq[1:]):
        assert pair_metric(a, b, w) > 0
    limit = seq[-1]
    vals = idft(limit.f, 2048).real()
    assert vals.min() >= -1e-6 and vals.max() <= 2.0 + 1e-6


def test_strict_mode_raises_on_unmeetable_budget():
    w = power_weight(0.5)
    G = 1024
    with pytest.raises(BudgetError, match="exceeds budget"):
        run_baire(
            CoeffVector.delta(0, 1.0), CompactSet.full_circle(G),
            [0], [1e-6], w, G, strict=True, max_halvings=2,
        )
