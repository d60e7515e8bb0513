"""Hybrid analog/digital beamformer design toolkit for massive MIMO."""

from . import errors
from .beamform import (
    DigitalPrecoderOpt,
    HybridCombiner,
    HybridPrecoder,
    SystemDims,
    analytic_mse,
    mmse_digital_combiner,
    mmse_full_combiner,
    monte_carlo_mse,
    optimal_digital_combiner,
    optimal_digital_precoder,
    trace_objective,
)
from .channel import (
    ChannelRealization,
    KroneckerParams,
    MmWaveParams,
    circulant_channel,
    exp_corr_matrix,
    gaussian_channel,
    interference_cov,
    mmwave_channel,
    steering_vector,
)
from .combiner import (
    GrtmSelection,
    GrtmState,
    append_ratio_matrices,
    grtm,
    grtm_select,
    kronecker_combiner,
    magiq_combiner,
    somp_weighted_combiner,
    trace_objective_append,
)
from .hardware import (
    Dictionary,
    HardwareScheme,
    block_subarrays,
    column_feasible,
    component_counts,
    feasible,
    gaussian_dictionary,
    project,
    s1,
    s2,
    s3,
    s4,
    s5,
    steering_dictionary,
)
from .harness import (
    AlgorithmSpec,
    ChannelSpec,
    DictionarySpec,
    ExperimentConfig,
    InterferenceSpec,
    ResultRecord,
    config_from_dict,
    config_to_dict,
    load_config,
    read_csv,
    run_scenario,
    write_csv,
)
from .linalg import (
    HermitianFactor,
    hermitian_part,
    hermitian_sqrt,
    orth_projector,
    procrustes_unitary,
    top_eigvecs,
)
from .precoder import (
    AltMagState,
    SolverControls,
    alt_mag,
    ls_digital_precoder,
    magiq_precoder,
    minimal_gap_quantize,
    pe_altmin_precoder,
    quantization_inner,
    somp_inner,
    somp_precoder,
)
from .presets import PRESET_NAMES, preset, preset_summaries

__version__ = "0.1.0"
