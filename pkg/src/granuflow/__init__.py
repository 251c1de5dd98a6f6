"""granuflow: front tracking and Lyapunov-functional analysis for granular flow."""

from .model import DomainBox, State, eigenvalues, eigenvectors, flux, gnl_indicator
from .profiles import Profile
from .riemann import RiemannFan, WaveFront, partition_rarefaction, solve_riemann
from .fronttrack import TrackedSolution, init_tracking
from .splitting import SplitRun, apply_source_step, run_balance_law
from .functionals import (FunctionalReport, JumpCatalog, Kappas, calibrate_kappas,
                          glimm, interaction_potential, l1_distance, phi,
                          total_strength)
from . import verify, wavecurves

__version__ = "0.1.0"
