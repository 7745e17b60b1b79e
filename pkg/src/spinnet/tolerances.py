"""Central numeric tolerance defaults.

Every magic tolerance used by the library lives here, so tests and callers
share a single source of truth.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # linear-algebra hygiene
    hermiticity: float = 1e-12
    unitarity: float = 1e-10
    norm: float = 1e-12
    psd: float = 1e-9          # most negative eigenvalue tolerated in a covariance
    rho_psd: float = 1e-9      # most negative eigenvalue tolerated in a density matrix
    # engine cross-checks
    engine_vs_oracle: float = 1e-8   # CLI oracle-check failure threshold
    # Fisher-matrix eigenvalue pair cutoff: pairs with p_k + p_l <= eps_p are skipped
    eps_p: float = 1e-12
    # double-well solver: relative eigenvalue drift allowed under 2x grid refinement
    grid_refinement: float = 1e-6
    # mode grid orthogonality
    mode_overlap: float = 1e-6


DEFAULT = Tolerances()
