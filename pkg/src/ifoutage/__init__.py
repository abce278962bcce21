"""Integer-forcing MIMO receivers under random unitary pre-processing.

Achievable rates (MMSE, IF, IF-SIC, joint ML), worst-case outage bounds,
Monte Carlo validation and guaranteed multicast rates.
"""

__version__ = "0.1.0"

from .errors import DomainError, EnumerationCapError, IFOutageError, NumericalError
from .channel import (
    ComplexChannel,
    OrthogonalMatrix,
    RealChannel,
    SpectrumD,
    UnitaryMatrix,
    channel_from_spectrum,
    realify,
    spectrum_from_channel,
    spectrum_grid,
    wi_mutual_information,
)
from .ensembles import (
    RandomStream,
    induced_real_orthogonal,
    sample_cre,
    sample_cue,
    sample_normalized_rayleigh,
)
from .lattice import (
    IntegerMatrix,
    LatticeBasis,
    MinimaReport,
    dual_basis,
    enumerate_ball,
    lll_reduce,
    primitive_filter,
    quadruple_reduce,
    shortest_vector,
    successive_minima,
)
from .rates import (
    EqualizerSet,
    RateReport,
    effective_snr,
    if_rate,
    if_sic_rate,
    joint_ml_rate,
    mmse_equalizer,
    mmse_rate,
    rate_per_equation,
)
from .bounds import (
    BoundParams,
    alpha,
    hermite_bar,
    lemma2_bound,
    lemma3_bound,
    theorem1_bound,
    theorem2_bound,
    worst_case_bound,
)
from .montecarlo import (
    OutageEstimate,
    SimConfig,
    empirical_outage,
    lemma1_distribution_check,
    rate_pdf,
    worst_case_empirical,
)
from .multicast import (
    MulticastScenario,
    existence_margin,
    guaranteed_rate,
    normalize_users,
)
