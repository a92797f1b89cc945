"""curlflux: curl-flux decomposition of open-quantum-system steady states
and the equilibrium/nonequilibrium split of linear response spectra."""

__version__ = "0.1.0"

from .flux import (
    FluxDecomposition,
    SplitOperators,
    curl_flux,
    is_detailed_balanced,
    loop_decomposition,
    render_flux_report,
    split_operators,
)
from .junction import (
    JunctionDerived,
    JunctionParams,
    analytic_propagator_ge,
    build_junction,
    fermi_dirac,
    flux_magnitude,
    hybridized_parameters,
    transmission,
)
from .liouville import (
    DissipationChannel,
    HilbertBasis,
    SuperoperatorBlocks,
    assemble,
    build_liouvillian,
    commutator_superop,
    devectorize,
    inner_product,
    left_mult,
    partition,
    right_mult,
    trace_vector,
    vectorize,
)
from .reduction import (
    SteadyState,
    coherence_map,
    effective_rate_matrix,
    memory_kernel,
    propagate,
    rate_steady_state,
    steady_state,
)
from .response import (
    Probe,
    ResponseSpectrum,
    check_equilibrium_fdr,
    fluctuation_spectrum,
    green_function,
    linear_response_freq,
    linear_response_time,
    response_split,
    spectrum_to_csv,
)
