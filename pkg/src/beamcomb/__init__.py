"""Discrete beam combination for beamspace massive MIMO receivers.

The pipeline: a geometric multipath channel gives a channel correlation
matrix (CCM); a DFT beamspace transform and strongest-beam selection shrink
it to L beams; a network of B-bit phase shifters then combines the L beams
into K RF chains. Combination weights come from a branch-and-bound search
(``bb_bc``), a sequential greedy rule (``sg_bc``) or brute force
(``exhaustive``).
"""
from ._accel import JIT_ENABLED
from .beamspace import (BeamspaceOperator, beamspace_ccm, beams_for_power, dft_operator,
                        estimate_beam_count, leakage_profile, select_beams, submatrix,
                        two_dim_operator, union_measure)
from .channel import (Ccm, ChannelConfig, MpcSet, UserGeometry, ensemble_ccm,
                      noise_variance_for, realize_channel, sample_ccm, sample_geometry,
                      signal_ccm_estimate, steering)
from .combiner import (CombinerMatrix, PhaseAlphabet, SubproblemInstance, SubproblemSolution,
                       approx_discrete_bound, efficiency, optimal_unconstrained,
                       round_to_alphabet, solve_subproblem)
from .errors import (BeamcombError, ConfigError, DegenerateCombinerError, DimensionError,
                     InputError, NoRootError, NotApplicableError, SearchSpaceError,
                     ZeroSignalError)
from .numerics import HermEig, SecularProblem, herm_eig, solve_secular
from .solvers import ColumnReport, SolverReport, bb_bc, column_values, deflate, exhaustive, sg_bc

__version__ = "0.1.0"
