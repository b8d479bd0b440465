import numpy as np
import pytest

from wl2lab.blocks import (
    Block,
    BlockConstructionError,
    build_block,
    verify_block,
)
from wl2lab.fourier import CoeffVector


def test_zero_polynomial_rejected():
    b = Block(eta=1 / 16, M=1, S=4, poly=CoeffVector.zeros(8),
              scales=np.array([1 / 64]), weights=np.ones(1), plateau_radius=1 / 128)
    rep = verify_block(b)
    assert rep.floor_meas == 0.0
    assert rep.flat_radius_meas == 0.0
    assert not rep.accepted


def test_cosine_mode_rejected_for_floor():
    c = CoeffVector.zeros(1)
    c.coeffs[0] = c.coeffs[2] = 0.5
    b = Block(eta=1 / 16, M=1, S=4, poly=c.enforce_real(),
              scales=np.array([1 / 64]), weights=np.ones(1), plateau_radius=1 / 128)
    rep = verify_block(b)
    assert b.poly.at(0) == 0.0
    assert rep.floor_meas < -1.0 / 4
    assert not rep.accepted


def test_built_block_contract():
    block, rep = build_block(1 / 16, 1, 4, 4096)
    assert rep.accepted
    assert block.poly.at(0) == 0.0                       # exact mean zero
    assert block.poly.conjugate_symmetry_defect() == 0.0  # exact symmetry
    assert rep.floor_meas >= -1.0 / 4 - 1e-9
    assert rep.sup_meas <= 1.0 + 1e-9
    assert rep.flat_radius_meas > 0
    assert np.isfinite(rep.A_meas)


def test_envelope_self_consistency():
    block, rep = build_block(1 / 32, 2, 8, 4096)
    N = block.poly.degree
    n = np.arange(1, N + 1, dtype=float)
    env = block.eta * np.minimum((block.eta * n) ** block.M, (block.eta * n) ** -block.M)
    mags = np.maximum(
        np.abs(block.poly.coeffs[N + 1 :]), np.abs(block.poly.coeffs[:N][::-1])
    )
    assert np.all(mags <= block.eta * 0 + rep.A_meas * env + 1e-18)


def test_rejects_bad_parameters():
    with pytest.raises(ValueError, match="eta"):
        build_block(0.7, 1, 4, 4096)
    with pytest.raises(ValueError, match="64/eta"):
        build_block(1 / 16, 1, 4, 512)
    with pytest.raises(ValueError, match="power of two"):
        build_block(1 / 16, 1, 4, 5000)


def test_scale_too_fine_for_grid_cap():
    with pytest.raises(BlockConstructionError, match="sampling grid"):
        build_block(1e-4, 3, 64, 1 << 20)


@pytest.mark.parametrize("M,S", [(1, 4), (2, 8), (3, 16)])
def test_a_meas_stable_under_eta_halving(M, S):
    reports = [build_block(eta, M, S, 8192)[1] for eta in (1 / 16, 1 / 32)]
    ratio = reports[1].A_meas / reports[0].A_meas
    assert 0.25 <= ratio <= 4.0


def test_a_meas_nondecreasing_in_M():
    # recorded empirical regularity of this construction
    a_vals = [build_block(1 / 16, M, 8, 8192)[1].A_meas for M in (1, 2, 3)]
    assert a_vals[0] <= a_vals[1] <= a_vals[2]


def test_floor_tracks_s():
    for S in (4, 8, 16):
        _, rep = build_block(1 / 16, 2, S, 8192)
        assert rep.floor_meas >= -1.0 / S - 1e-9
        # the construction actually uses most of the allowance
        assert rep.floor_meas <= -0.5 / S
