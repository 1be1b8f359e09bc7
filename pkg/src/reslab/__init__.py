"""Transfer-operator resonances and correlation-decay tools for interval maps."""

import os as _os

# honor the thread cap before any BLAS-backed import reads the environment
_threads = _os.environ.get("RESLAB_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

__version__ = "0.1.0"

from .expressions import parse_expr, differentiate, evaluate  # noqa: F401
from .maps import (  # noqa: F401
    MarkovAffineMap,
    SmoothFullBranchMap,
    MonotoneFullBranchMap,
    parse_map_spec,
    validate_map,
    branch_inverse,
)
from .affine import (  # noqa: F401
    WeightMode,
    build_Bk,
    build_Tkr,
    resonance_set,
    topological_entropy,
)
from .spectra import SpectrumReport, spectrum_with_multiplicity  # noqa: F401
from .correlations import correlation_sequence, fit_decay  # noqa: F401
from .discretize import cheb_operator, discretize_spectrum, ulam_matrix  # noqa: F401
from .smooth import (  # noqa: F401
    GapParams,
    apply_transfer,
    exclusion_regions,
    gap_params,
    resonance_scan,
    xi_function,
)
from .mme import l0_apply, mixing_rate_check, mme_iterate  # noqa: F401
