"""Autonomous quantum Crooks equality for a qubit coupled to an oscillator battery."""
from .diagnostics import (ErrorReport, analyse, discrepancy_D, factorisation_errors,
                          identity_oracle, infer_q, ratio_R)
from .dynamics import (Direction, ProtocolConfig, ProtocolResult, build_propagator,
                       joint_final_state, run_crooks_pair, run_protocol)
from .errors import (AQCError, ConfigInvalid, ConfigMismatch, DegenerateRatio,
                     EigensolverFailure, GridTooSmall, IOFailure, TabulatedOutOfRange,
                     TruncationInsufficient, UndefinedQ, UnderflowRisk)
from .oscillator import (BatteryState, Cat, Coherent, FockLevel, FockSpace, SqueezedDisplaced,
                         apply_gibbs_weight, build_operators, effective_potential, prepare_state,
                         time_reverse)
from .phase_space import WignerGrid, negativity_volume, wigner_of_state
from .predictions import (TwoLevelSystem, cat_pair_map, coherent_delta_E, coherent_pair_map,
                          free_energy_change, predicted_ratio, q_factor, quantum_work,
                          squeezed_pair_map, thermal_frequency_split)
from .splitting import (FlatEnds, Linear, Sinusoidal, Tabulated, joint_hamiltonian,
                        profile_operator, profile_value)

__version__ = "0.1.0"
