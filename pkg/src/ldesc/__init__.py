"""Arc-length descriptor fields for flows and maps."""

from .descriptors import (
    DescriptorSpec,
    compute_Lf,
    compute_M,
    compute_MDp,
    evaluate_batch,
)
from .errors import LdescError
from .fieldscan import (
    Region,
    contour_through,
    contours,
    horizontal_deviation,
    sweep,
)
from .integrate import DEFAULT_CONFIG, IntegratorConfig, integrate
from .systems import catalog, get, load_config
from .verify import line_scan, run_all, run_claim, separatrix_crossing

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_CONFIG",
    "DescriptorSpec",
    "DescriptorTransformer",
    "IntegratorConfig",
    "LdescError",
    "Region",
    "catalog",
    "compute_Lf",
    "compute_M",
    "compute_MDp",
    "contour_through",
    "contours",
    "evaluate_batch",
    "get",
    "horizontal_deviation",
    "integrate",
    "line_scan",
    "load_config",
    "run_all",
    "run_claim",
    "separatrix_crossing",
    "sweep",
]


def __getattr__(name):
    # keep scikit-learn optional: import the adapter only when asked for
    if name == "DescriptorTransformer":
        from .estimators import DescriptorTransformer
        return DescriptorTransformer
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
