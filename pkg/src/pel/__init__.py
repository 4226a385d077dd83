"""Pattern entropy toolkit.

Patterns relabel a sequence by order of first appearance.  This package
computes exact and estimated pattern entropies for i.i.d., Markov,
mixed-alphabet, noisy and sticky sources, together with the finite-n
bounds that relate them to the atom-clumped process.
"""

from ._accel import USE_NUMBA
from .bounds import (
    BoundCurve,
    D_partial,
    GrowthParams,
    growth_distribution,
    prop4_lower_bound,
    theorem5_curve,
    waiting_time_entropy_bound,
)
from .distributions import (
    X_O,
    ContinuumToken,
    DiscreteDistribution,
    MixedDistribution,
    clump,
    entropy,
    sample,
    tilde_of,
)
from .entropy import (
    EntropyReport,
    PatternLaw,
    block_entropy,
    conditional_entropy,
    exact_pattern_law,
    hmm_entropy_bracket,
    mc_pattern_entropy,
    theoretical_rate,
)
from .library import builtin_specs
from .patterns import (
    EnumerationCapError,
    OccurrenceTable,
    bell_number,
    enumerate_patterns,
    is_valid_pattern,
    occurrence_table,
    pattern_of,
)
from .processes import (
    IID,
    AdditiveNoiseSpec,
    HiddenMarkovModel,
    MarkovModel,
    MixedMarkovModel,
    NonErgodicError,
    StickySpec,
    markov_entropy_rate,
    repeat_mass_estimate,
    simulate,
    stationary_distribution,
    tilde_process,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
