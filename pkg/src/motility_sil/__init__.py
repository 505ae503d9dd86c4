"""Phase-field cell motility: coupled solvers and the sharp-interface limit."""

__version__ = "0.1.0"

from .potentials import (PotentialSpec, StandingWaveProfile, asymmetry_indicator,
                         make_potential, mirror_potential, standing_wave)
from .kernel import (KernelSolution, PhiTable, phi_beta, phi_beta_prime,
                     relax_reduced, solve_psi0)
from .sil1d import (HysteresisTrace, RootSet, Schedule, beta_critical,
                    reference_schedule, run_hysteresis, sil_roots,
                    traveling_wave_roots)
from .stability import SpectrumReport, assemble_AV, is_stable, spectrum

__all__ = [
    "__version__",
    "PotentialSpec", "StandingWaveProfile", "make_potential", "mirror_potential",
    "standing_wave", "asymmetry_indicator",
    "KernelSolution", "PhiTable", "solve_psi0", "phi_beta", "phi_beta_prime",
    "relax_reduced",
    "RootSet", "Schedule", "HysteresisTrace", "sil_roots", "traveling_wave_roots",
    "beta_critical", "run_hysteresis", "reference_schedule",
    "SpectrumReport", "assemble_AV", "spectrum", "is_stable",
]
