"""Radiative corrections of bound charges in a zero-point background field.

Spectral backends (closed-form oscillator, hydrogen radial solver with a
pseudostate continuum, generic 1D finite differences), background spectra
(zero-point, thermal, cavity-modified), detailed energy balance, Einstein
coefficients and lifetimes, radiative level shifts by several routes, and a
seeded trajectory-ensemble simulator — all in Hartree atomic units.
"""

__version__ = "1.0.0"

from .balance import BalanceReport, diffusion_rate, energy_flow, larmor_rate
from .constants import (AU_TIME_S, BOHR_M, DEFAULT_CONSTANTS,
                        FINE_STRUCTURE_ALPHA, HARTREE_EV, HARTREE_KELVIN,
                        HARTREE_MHZ, PhysicalConstants, UnitSystem, convert)
from .errors import (DegeneracyError, DiscretizationError, DivergenceError,
                     DomainError, NumericalError, PoleError, RunawayError,
                     SedatomError, UnitError, UnsupportedRouteError,
                     ValidationError)
from .field import (FieldSpectrum, cavity_mask, equilibrium_gamma_a,
                    thermal_gamma_a, zpf_density)
from .lamb import (CutoffPolicy, ShiftResult, free_particle_shift,
                   lamb_proper, mass_renormalization_constant, polarizability,
                   pv_integral, refractive_index, thermal_free_particle_delta,
                   thermal_lamb_delta, total_shift,
                   total_shift_from_polarizability)
from .sedsim import (FieldRealization, SimConfig, SimResult,
                     integrate_trajectory, mix_seed, run_ensemble,
                     sample_field)
from .spectra import (PotentialModel, SpectralData, oscillator_strength,
                      solve_custom_1d, solve_harmonic, solve_hydrogen_radial,
                      trk_sum, virial_check)
from .transitions import (DecayChannel, DecaySummary, RateTable,
                          build_rate_table, decay_summary, einstein_A,
                          einstein_B, induced_rate)
