from .config import (
    FrontendConfig,
    FM,
    ENERGY,
    ENERGY_FM,
    AFC_INPUTS,
    LDA_FROM_ADAPTIVE,
    LDA_FROM_SPATIAL_DIFF,
    VARIANTS,
)
from .lda import subband_energy, energy_db, lda_q, subband_energy_op, energy_db_op, lda_q_op
from .fm import fm_component, fm_op, fm_taper
from .controller import (
    AdaptiveFeedbackController,
    BatchNormStats,
    ControllerInput,
    afc_forward,
    init_controller_params,
    TRAIN,
    INFER,
)
from .state import AdaptState
from .trace import QTrace
from .frontend import Frontend, FrameOutput, FrontendRun, diff_channels_op, frame_grad_case, FRAME_CASE
