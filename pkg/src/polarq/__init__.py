"""Polar codes under coarsely quantized successive-cancellation decoding."""

from .channels import (
    BAWGN,
    BEC,
    BSC,
    ChannelModel,
    DiscreteSymmetric,
    InvalidChannelError,
    LlrDensity,
    TripleDensity,
    binary_entropy,
    channel_from_triple,
    parse_channel,
    triple_stats,
)
from .quantizer import (
    SIGN,
    InvalidQuantizerError,
    QuantizerSpec,
    SignQuantizer,
    levels,
    parse_quantizer,
    quantize,
    quantize_density,
    sign_quantize,
)
from .codec import (
    PolarCode,
    encode,
    erasure_sc_decode,
    index_to_path,
    quantized_sc_decode,
    sc_decode,
)
from .density_evolution import (
    SynthesizedFamily,
    bit_error_prob,
    choose_info_set,
    de_check,
    de_var,
    evolve_triple,
    gallager_trajectory,
    rate_for_union_bound,
    synthesize,
    synthesize_triples,
    triple_minus,
    triple_plus,
)
from .bounds import (
    BoundsSeries,
    bhattacharyya_step_check,
    bounds_series,
    bounds_series_mc,
    bracket_capacity,
    curve,
    lower_functional,
    universal_lower_bound,
)
from .sim import TrialReport, genie_bit_errors, simulate_block_error, union_bound

__version__ = "0.1.0"
