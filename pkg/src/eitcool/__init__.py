"""Dark-state (EIT) cooling of a trapped three-level Lambda atom."""
from .errors import (ConfigError, EITCoolError, HeatingRegimeError, NumericalError,
                     ParameterError, RegimeError)
from .params import Geometry, LambdaParams, ProbeParams, TrapParams, derived_quantities
from .internal import (bloch_system, build_hamiltonian, dressed_decomposition,
                       excitation_spectrum, fluctuation_spectrum, internal_steady_state)
from .cooling import (cooling_summary, evolve_mean_n, optimize_parameters, rate_evolve,
                      sideband_rates, steady_populations, validity_check)
from .generic import coupling_coefficients, generic_evolve, generic_rates
from .fullquantum import (build_full_generator, displacement_matrix, master_evolve,
                          mc_ensemble, mc_trajectory)
from .config import parse_config
from .commands import run_command
from .tables import CsvTable, emit_csv

__version__ = "0.1.0"
