import numpy as np
import pytest

from wl2lab.fourier import CoeffVector
from wl2lab.localizer import (
    Localizer,
    LocalizerBuildError,
    LocalizerParams,
    build_localizer,
    choose_S,
    verify_localizer,
)
from wl2lab.weights import power_weight


def test_choose_S_constant_weight_hand_values():
    # j scans from 10, needs S > 20 and at least 10 terms
    p = choose_S(power_weight(0.0), 0.1)
    assert (p.j_lo, p.S, p.L_value) == (10, 21, 12.0)
    p = choose_S(power_weight(0.0), 0.5)
    assert (p.j_lo, p.S, p.L_value) == (2, 5, 4.0)


def test_choose_S_direct_summation_oracle():
    w = power_weight(0.5)
    p = choose_S(w, 0.1)
    vals = w.values(p.S)
    tail = np.sum(1.0 / vals[p.j_lo : p.S + 1])
    assert abs(tail - p.L_value) < 1e-12
    assert p.L_value >= 10.0
    assert np.sum(1.0 / vals[p.j_lo : p.S]) < 10.0 or p.S == 21  # minimality
    assert p.S > 20


def test_choose_S_divergence_premise_failure():
    with pytest.raises(LocalizerBuildError, match="hypothesis"):
        choose_S(power_weight(2.0), 0.1, scan_cap=10**6)


def test_degenerate_constant_psi():
    # control case: psi = 1 has no deleted arc
    params = LocalizerParams(
        epsilon=0.25, M=3, S=9, L_value=6.0, j_lo=4, S_block=9, eps_work=0.25
    )
    loc = Localizer(params=params, psi=CoeffVector.delta(0, 1.0), report=None)
    rep = verify_localizer(loc, power_weight(0.0))
    assert rep.passes["grid_min"] and rep.passes["grid_max"] and rep.passes["mean"]
    assert not rep.passes["deleted_arc"]


def test_constant_weight_localizer_all_properties():
    loc = build_localizer(power_weight(0.0), 0.25, G=4096)
    rep = loc.report
    assert rep.all_pass()
    assert rep.mean_coeff == 1.0
    assert loc.psi.conjugate_symmetry_defect() == 0.0
    assert rep.grid_min >= -1e-9
    assert rep.grid_max <= 1.25 + 1e-9
    assert rep.deleted_arc_residual <= 1e-7
    assert rep.coeff_sup <= 0.25 + 1e-9
    assert rep.tail_energy <= 0.25**2


def test_arc_lengths_strictly_decrease():
    w = power_weight(0.5)
    arcs = [build_localizer(w, e, G=4096).report.deleted_arc_len for e in (0.4, 0.2, 0.1)]
    assert arcs[0] > arcs[1] > arcs[2] > 0


def test_tail_energy_definition_matches_direct_sum():
    w = power_weight(0.5)
    loc = build_localizer(w, 0.4, G=4096)
    psi = loc.psi
    N = psi.degree
    lam = w.values(N)
    direct = sum(
        abs(psi.at(n)) ** 2 * lam[abs(n)] for n in range(-N, N + 1) if n != 0
    )
    assert abs(direct - loc.report.tail_energy) < 1e-12 * max(1.0, direct)


def test_coeff_sup_bounded_by_block_floor_mass():
    # |psi^(n)| <= 2/S_block < eps by the mean-zero mass bound
    w = power_weight(0.5)
    loc = build_localizer(w, 0.2, G=4096)
    assert loc.report.coeff_sup <= 2.0 / loc.params.S_block + 1e-9
