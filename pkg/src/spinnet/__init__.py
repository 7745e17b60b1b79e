"""Simulator and metrology toolkit for networks of nonlocally coupled
collective-spin ensembles.

The library models M ensembles of N two-mode bosons, each mapped onto a
collective pseudo-spin of length S = N/2 (an (N+1)-level qudit), evolving
under a diagonal network Hamiltonian

    H = (chi_cont + chi_loc) * sum_i (Jz_i)^2
        + chi_nloc * sum_{i<j} Jz_i Jz_j.

Three evolution engines are provided:

* ``spinnet.oracle``: brute-force evolution of the full (N+1)^M state
  vector. Slow, exact, and normative: the fast engines are locked to it.
* ``spinnet.gie``: closed-form moments for a product of x-polarized
  coherent spin states under the network Hamiltonian (the entangling,
  "GIE" protocol).
* ``spinnet.gid``: semi-analytic moments for locally squeezed and rotated
  states under the nonlocal coupling alone (the dephasing, "GID"
  protocol), at O(N) cost per time point, independent of M.

``spinnet.metrology`` turns moment tables into squeezing parameters,
covariance/Fisher matrices and the entanglement witnesses C1, C2 (and
their tightened variants), and ``spinnet.couplings`` computes the
microscopic coupling constants chi_cont, chi_loc, chi_nloc from trap
geometry. ``spinnet.cli`` drives everything from declarative TOML configs.
"""

from spinnet.spin import EnsembleDim, SpinOps, build_spin_ops, css_x, rotate
from spinnet.oracle import Couplings, GlobalState
from spinnet.gie import gie_moments, reduced_state_gie
from spinnet.gid import GidSchedule, gid_moments, reduced_state_gid
from spinnet.config import ConfigError, RunConfig, load_run_config
from spinnet.moments import MomentTable
from spinnet.metrology import (
    collective_squeezing,
    local_squeezing,
    witness_record,
)
from spinnet.couplings import (
    DoubleWellSpec,
    GaussianBarrier,
    ModePair,
    bmv_couplings,
    cgb_coupling,
    couplings_dw,
    solve_double_well,
)

__all__ = [
    "EnsembleDim",
    "SpinOps",
    "build_spin_ops",
    "css_x",
    "rotate",
    "Couplings",
    "GlobalState",
    "gie_moments",
    "reduced_state_gie",
    "GidSchedule",
    "gid_moments",
    "reduced_state_gid",
    "ConfigError",
    "RunConfig",
    "load_run_config",
    "MomentTable",
    "collective_squeezing",
    "local_squeezing",
    "witness_record",
    "DoubleWellSpec",
    "GaussianBarrier",
    "ModePair",
    "bmv_couplings",
    "cgb_coupling",
    "couplings_dw",
    "solve_double_well",
]
