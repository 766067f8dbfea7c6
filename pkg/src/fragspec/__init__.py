"""fragspec: angularly resolved photofragment spectra for intense-laser
dissociation of a two-electronic-state diatomic ion.

Pipeline: rovibrational initial state -> two-channel split-operator
propagation with flux splitting -> molecular-frame momentum spectrum ->
regularized Abel projection onto the detector plane -> rovibrational,
nuclear-spin and focal-volume averaging -> detector-resolution window and
normalization.
"""

__version__ = "0.1.0"

from .angular import AngularBasis
from .boundstates import (BoundState, count_bound_levels, level_table,
                          rotational_shift, solve_bound_state)
from .constants import CONST, Constants
from .grids import RadialGrid
from .potentials import (PotentialSet, load_potential_table, model_potential,
                         shipped_table_path, write_potential_table)
from .propagator import (JobResult, MomentumAmplitude, Numerics,
                         TwoChannelPropagator, Wavefunction, build_initial,
                         run_job)
from .pulse import LaserPulse
from .spectra import (Cut, DetectorGridSpec, DetectorImage, MolecularSpectrum,
                      abel_project, convolve_detector, cut, detector_mass,
                      direct_abel, molecular_mass, momentum_spectrum,
                      normalize, small_velocity_check)
from .averaging import (FocusModel, PopulationModel, focal_radii,
                        gaussian_overlap_factor, intensity_average,
                        load_population_file, mn_average, rotational_average,
                        vibrational_average, peak_intensity)

__all__ = [name for name in dir() if not name.startswith("_")]
