"""Integrated random-partition sufficient dimension reduction.

Distance-correlation screening over random partitions of the
covariates, inverse regression inside each screened envelope, and
trace-normalized integration of the resulting kernel sketches.
"""

import os

# Threaded BLAS reductions change bit patterns with the thread count;
# pin to one thread (set any of these beforehand to opt out) so fits
# replay identically across machines and worker splits.
if not os.environ.get("IRPSDR_KEEP_BLAS_THREADS"):
    for _var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, "1")
del os

from .baselines import marginal_r1, pca_sdr  # noqa: E402
from .data_model import (  # noqa: E402
    CovarianceEstimate,
    Dataset,
    load_csv,
    make_dataset,
    sample_covariance,
)
from .dcor import DcorValue, dcor2_sample, dcov2_sample  # noqa: E402
from .errors import (  # noqa: E402
    DataError,
    EstimationError,
    NumericalError,
    ParameterError,
)
from .evaluation import (  # noqa: E402
    SubspaceScore,
    projection_distance,
    trace_correlation,
)
from .kernel_integration import (  # noqa: E402
    IntegratedKernel,
    SdrFit,
    SketchKernel,
    ensemble_from_parts,
    ensemble_kernel,
    fit_from_dict,
    fit_to_dict,
    integrate_partitions,
    integrate_sizes,
    kernel_from_dict,
    kernel_to_dict,
    leading_basis,
    sketch_kernel,
)
from .model_selection import DimensionChoice, select_dimension  # noqa: E402
from .pipeline import (  # noqa: E402
    ClassificationResult,
    eeg_preprocess,
    fit_sdr,
    loo_classify,
)
from .partition_screen import (  # noqa: E402
    EnvelopeSelection,
    Partition,
    candidate_sizes,
    random_partition,
    screen,
)
from .seeding import child_seed, substream  # noqa: E402
from .simulation import (  # noqa: E402
    METHODS,
    ExperimentReport,
    ModelSpec,
    default_u_grid,
    generate,
    model_spec,
    population_sigma,
    run_experiment,
    true_basis,
)
from .sir_core import SirResult, sir_directions, sir_kernel, slice_assign  # noqa: E402

__version__ = "0.1.0"
