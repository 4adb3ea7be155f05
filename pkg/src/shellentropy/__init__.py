"""Subsystem entanglement entropy of spin chains restricted to energy shells."""

from .analysis import (GammaEstimate, LinearFit, VolumeLawScan, estimate_gamma,
                       fit_entropy_vs_lndos, ols_fit, volume_law_scan)
from .entanglement import (CoefficientMatrix, SchmidtSpectrum, coefficient_matrix,
                           page_average, schmidt_spectrum, sector_entropies, state_entropy,
                           vn_entropy)
from .errors import (DegenerateWindowError, DomainError, EmptyShellError, NumericalError,
                     ShellEntropyError)
from .hamiltonian import CouplingParams, SectorMatrix, build_sector_hamiltonian
from .shell import (ByCenter, ByWindow, EnergyShell, PeakDos, ProductShell, ShellAverage,
                    build_product_shell, eigenstate_shell_average, haar_shell_average,
                    select_shell, typical_product_state_average)
from .spectral import (DosEstimate, GlobalSpectrum, SpectralDecomposition, diagonalize,
                       estimate_dos, merge_spectra, solve_chain)
from .spinbasis import ChainGeometry, SectorBasis, enumerate_sector, join_config, split_config

__version__ = "0.1.0"
