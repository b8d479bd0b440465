"""Central tolerance table.

Every numeric check in the library reads its tolerance from one
instance of :class:`Tolerances`, so a run can be reproduced from the
manifest and a report can name the exact threshold that failed.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # fourier core
    roundtrip_rel: float = 1e-10
    convolution_abs: float = 1e-10
    real_symmetry: float = 1e-12
    parseval: float = 1e-10
    wiener_slack: float = 1e-12

    # blocks
    tau_flat: float = 1e-6
    tau_floor: float = 1e-9
    block_sup_slack: float = 1e-9
    a_max: float = 1e9

    # localizer
    tau_supp: float = 1e-7
    psi_min: float = -1e-9
    psi_range_slack: float = 1e-9
    coeff_sup_slack: float = 1e-9

    # pair space / deletion runs
    metric_triangle: float = 1e-10
    trace_recompute: float = 1e-10
    mean_drift: float = 1e-9
    range_slack: float = 1e-6
    budget_slack: float = 1e-9
    chop_l1_per_step: float = 1e-10

    # threshold constructions
    divergence_slack: float = 1e-9
    mtest_cauchy: float = 1e-6
    stage_half_slack: float = 1e-12
    second_diff: float = 1e-14
    tail_sup_slack: float = 1e-12

    def replace(self, **kwargs) -> "Tolerances":
        return dataclasses.replace(self, **kwargs)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


DEFAULT_TOLS = Tolerances()
