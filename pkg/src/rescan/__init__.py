"""Scattering resonances of compactly supported potentials from discretised resolvent norms."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .greens import SheetPoint, green_eval, green_gradient, hankel_h1
from .kernel import build_averaged_matrix, build_grid, build_kernel_matrix
from .metrics import attouch_wets, hausdorff
from .oracle import SquareWellSpec, find_zeros, lemma_fuzz
from .potential import SupportBox, load_sampled_potential, make_builtin
from .resolvent import ThresholdRule, sigma_min, threshold_test
from .scan import ScanResult, cluster_flags, convergence_diagnostic, gamma_n, theta_set
from .tiling import Box, LatticeSpec, lattice_points, sheet_tiles, spiral_tiles
