from .filters import (
    GaborFilterSpec,
    InvalidSpec,
    BandEdgeWarning,
    synth_gabor,
    gabor_kernel,
    gabor_kernel_dq,
    gaussian_rate,
    freq_response,
    response_freqs,
    filter_gain_at,
    expected_center_gain,
    bandwidth_3db,
    MIN_Q,
    DEFAULT_TAPS,
    DEFAULT_FS,
)
from .bank import (
    FilterbankLayout,
    SubbandTensor,
    OrderTooHigh,
    build_bank,
    conv_same,
    filter_frames,
    spatial_diff,
    diff_centers,
    response_table,
)
