"""emgpr: two-channel surface-EMG movement recognition toolkit.

Pipeline pieces, usable separately or through `emgpr.evaluate.crossvalidate`:
recordings (load/synthesize/mix noise) -> causal bandpass+notch -> disjoint
windows -> time-domain features (incl. the log-compressed LMAV/NSV pair) ->
min-max scaling -> uncorrelated LDA -> QDA / RBF-SVM / KNN -> trial-wise
leave-one-out scores.
"""

from .dataset import (
    MOVEMENTS,
    NO_MIX,
    DatasetManifest,
    Recording,
    SyntheticSpec,
    estimate_snr,
    generate_synthetic,
    load_dataset,
    mix_awgn,
    save_dataset,
    save_recording,
    separable_gain_grid,
    separable_spec,
    separable_tilt_matrix,
)
from .preprocess import (
    FilterSpec,
    MinMax,
    Window,
    apply_filters,
    normalize_features,
    segment,
)
from .features import (
    CATALOG,
    FeatureSetSpec,
    FeatureVector,
    Thresholds,
    compute_feature,
    extract,
    extract_matrix,
    feature_set,
    lmav,
    nsv,
    tdpsd,
    with_lmav_nsv,
)
from .reduce import (
    UldaProjection,
    fit_ulda,
    project,
    res_index,
    res_index_general,
    scatter_export,
)
from .classify import ModelSpec, model_from_dict, model_to_dict, predict, train
from .evaluate import (
    ConfusionMatrix,
    EvalReport,
    Metrics,
    compare_groups,
    crossvalidate,
    metrics,
    sweep_snr,
    sweep_window,
)
from .selection import SelectionConfig, SelectionTrace, forward_select
from .seeding import derive_seed

__version__ = "0.1.0"
