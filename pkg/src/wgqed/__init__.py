"""Time-bin waveguide QED with matrix-free operators."""

__version__ = "0.1.0"

from .basis import (  # noqa: E402
    CompositeBasis,
    FockBasis,
    PairCross,
    PairSame,
    Single,
    TimeGrid,
    Vacuum,
    WaveguideBasis,
    flat_index,
    tensor_basis,
)
from .operators import (  # noqa: E402
    apply_accumulate,
    create,
    destroy,
    identity,
    lazy_product,
    lazy_sum,
    lazy_tensor,
    number,
    scale,
    set_active_bin,
    tensor,
    waveguide_create,
    waveguide_destroy,
)
from .states import (  # noqa: E402
    StateVector,
    expect,
    fock_state,
    inner,
    norm,
    normalize,
    one_photon_view,
    onephoton,
    tensor_state,
    two_photon_view,
    twophoton,
    zerophoton,
)
from .evolution import SolverConfig, expectation_series, waveguide_evolution  # noqa: E402
from .analysis import l2_error, mode_population, schmidt_decompose  # noqa: E402
