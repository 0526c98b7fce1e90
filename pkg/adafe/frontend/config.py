# coding=utf-8
"""
Static configuration of the adaptive front-end.
"""
import json
import os.path
from typing import Any, Dict, List, Optional

from ..base import BaseFrontendObj
from ..gabor import MIN_Q, FilterbankLayout

FM = "fm"
ENERGY = "energy"
ENERGY_FM = "energy_fm"
AFC_INPUTS = (FM, ENERGY, ENERGY_FM)

LDA_FROM_ADAPTIVE = "adaptive"
LDA_FROM_SPATIAL_DIFF = "spatial_diff"
LDA_SOURCES = (LDA_FROM_ADAPTIVE, LDA_FROM_SPATIAL_DIFF)

PRESET_DIR = "presets"
VARIANTS = (
    "ada_fe",
    "ada_fe_s_fm",
    "ada_fe_s_eg",
    "ada_fe_s_egfm",
    "frozen_q_baseline",
    "no_fixed_layer",
)


class FrontendConfig(BaseFrontendObj):
    """ Every static setting of the front-end.

    Args:
        n_filters (int): Number of fixed-layer filters N.
        diff_order (int): Spatial differentiation order k.
        filter_len (int): Filter length P. [samples]
        frame_len_ms (float): Analysis frame length. [ms]
        sample_rate (int): Operating sampling rate. [Hz]
        f_lo (float): Lowest fixed-layer center. [Hz]
        f_hi (float): Highest fixed-layer center. [Hz]
        fixed_q (float): Q of every fixed-layer filter.
        q_min (float): Lower clamp of the adaptive Q.
        q_max (float): Upper clamp of the adaptive Q.
        q_init (float): Adaptive Q at the first frame, and the base Q when
            level-dependent adaptation is disabled.
        lda_enabled (bool): Add the level-dependent Q term.
        lda_e_lo (float): Energy at and below which the level-dependent term
            is at its maximum. [dB]
        lda_e_hi (float): Energy at and above which it is at its minimum. [dB]
        lda_q_min (float): Level-dependent Q for loud channels.
        lda_q_max (float): Level-dependent Q for quiet channels; defaults to
            0.6 * q_max.
        lda_source (str): 'adaptive' measures the energy at the adaptive
            layer output, 'spatial_diff' at its input.
        fixed_layer_enabled (bool): Run the fixed layer and spatial
            differentiation before the adaptive layer.
        afc_enabled (bool): Add the feedback controller's Q term. With both
            afc_enabled and lda_enabled off, Q stays at q_init.
        afc_input (str): Controller input, one of 'fm', 'energy',
            'energy_fm'.
        controller_width (int): Hidden width of the controller; must equal
            the number of adaptive channels.
        bn_momentum (float): Running-statistics momentum of the controller's
            normalization.
        fm_n_fft (int): DFT length of the frequency-modulation estimate.
        detach_controller_input (bool): Treat the controller's input as a
            constant when differentiating, so gradients reach the controller
            only through the Q it outputs.
        variant (str): Name of the preset this configuration came from.
    """

    n_filters: int
    diff_order: int
    filter_len: int
    frame_len_ms: float
    sample_rate: int
    f_lo: float
    f_hi: float
    fixed_q: float
    q_min: float
    q_max: float
    q_init: float
    lda_enabled: bool
    lda_e_lo: float
    lda_e_hi: float
    lda_q_min: float
    lda_q_max: float
    lda_source: str
    fixed_layer_enabled: bool
    afc_enabled: bool
    afc_input: str
    controller_width: int
    bn_momentum: float
    fm_n_fft: int
    detach_controller_input: bool
    variant: str

    def __init__(
        self,
        n_filters: int = 40,
        diff_order: int = 1,
        filter_len: int = 150,
        frame_len_ms: float = 11.0,
        sample_rate: int = 16000,
        f_lo: float = 60.0,
        f_hi: float = 7800.0,
        fixed_q: float = 4.0,
        q_min: float = 0.5,
        q_max: float = 8.0,
        q_init: float = 2.0,
        lda_enabled: bool = True,
        lda_e_lo: float = -80.0,
        lda_e_hi: float = -20.0,
        lda_q_min: float = 0.6,
        lda_q_max: Optional[float] = None,
        lda_source: str = LDA_FROM_ADAPTIVE,
        fixed_layer_enabled: bool = True,
        afc_enabled: bool = True,
        afc_input: str = FM,
        controller_width: Optional[int] = None,
        bn_momentum: float = 0.99,
        fm_n_fft: int = 512,
        detach_controller_input: bool = False,
        variant: str = "ada_fe",
    ) -> None:
        if n_filters <= diff_order:
            raise ValueError(
                f"n_filters must exceed diff_order. Got {n_filters} <= {diff_order}."
            )
        if diff_order < 0:
            raise ValueError(f"diff_order must be non-negative. Got {diff_order}.")
        if q_min < MIN_Q:
            raise ValueError(f"q_min must be at least {MIN_Q}. Got {q_min}.")
        if not q_min < q_init < q_max:
            raise ValueError(
                f"Expected q_min < q_init < q_max. Got {q_min}, {q_init}, {q_max}."
            )
        if fixed_q < MIN_Q:
            raise ValueError(f"fixed_q must be at least {MIN_Q}. Got {fixed_q}.")
        if lda_q_max is None:
            lda_q_max = 0.6 * q_max
        if not lda_e_lo < lda_e_hi:
            raise ValueError(
                f"lda_e_lo must be below lda_e_hi. Got {lda_e_lo} >= {lda_e_hi}."
            )
        if not 0 < lda_q_min <= lda_q_max:
            raise ValueError(
                f"Expected 0 < lda_q_min <= lda_q_max. Got {lda_q_min}, {lda_q_max}."
            )
        if lda_source not in LDA_SOURCES:
            raise ValueError(f"lda_source must be one of {LDA_SOURCES}. Got {lda_source}.")
        if lda_source == LDA_FROM_SPATIAL_DIFF and not fixed_layer_enabled:
            raise ValueError(
                "lda_source 'spatial_diff' needs the fixed layer to be enabled."
            )
        if afc_input not in AFC_INPUTS:
            raise ValueError(f"afc_input must be one of {AFC_INPUTS}. Got {afc_input}.")
        n_adaptive = n_filters - diff_order if fixed_layer_enabled else n_filters
        if controller_width is None:
            controller_width = n_adaptive
        if controller_width != n_adaptive:
            raise ValueError(
                f"controller_width must equal the {n_adaptive} adaptive channels. "
                f"Got {controller_width}."
            )
        if not 0 <= bn_momentum < 1:
            raise ValueError(f"bn_momentum must lie in [0, 1). Got {bn_momentum}.")
        if frame_len_ms <= 0:
            raise ValueError(f"frame_len_ms must be positive. Got {frame_len_ms}.")
        self.n_filters = n_filters
        self.diff_order = diff_order
        self.filter_len = filter_len
        self.frame_len_ms = frame_len_ms
        self.sample_rate = sample_rate
        self.f_lo = f_lo
        self.f_hi = f_hi
        self.fixed_q = fixed_q
        self.q_min = q_min
        self.q_max = q_max
        self.q_init = q_init
        self.lda_enabled = lda_enabled
        self.lda_e_lo = lda_e_lo
        self.lda_e_hi = lda_e_hi
        self.lda_q_min = lda_q_min
        self.lda_q_max = lda_q_max
        self.lda_source = lda_source
        self.fixed_layer_enabled = fixed_layer_enabled
        self.afc_enabled = afc_enabled
        self.afc_input = afc_input
        self.controller_width = controller_width
        self.bn_momentum = bn_momentum
        self.fm_n_fft = fm_n_fft
        self.detach_controller_input = detach_controller_input
        self.variant = variant
        FilterbankLayout(n_filters, f_lo, f_hi, sample_rate)

    @property
    def layout(self) -> FilterbankLayout:
        """ Uniform layout of the N fixed-layer centers. """
        return FilterbankLayout(self.n_filters, self.f_lo, self.f_hi, self.sample_rate)

    @property
    def n_adaptive(self) -> int:
        """ Width of the adaptive layer and of the Q state. """
        if self.fixed_layer_enabled:
            return self.n_filters - self.diff_order
        return self.n_filters

    @property
    def n_channels(self) -> int:
        """ Number of feature channels, N - k. """
        return self.n_filters - self.diff_order

    @property
    def controller_input_width(self) -> int:
        return 2 * self.n_adaptive if self.afc_input == ENERGY_FM else self.n_adaptive

    @property
    def q_fm_scale(self) -> float:
        """ Scale and shift of the bounded controller output,
        (q_max - q_min) / 4. """
        return (self.q_max - self.q_min) / 4

    @property
    def adaptive(self) -> bool:
        return self.lda_enabled or self.afc_enabled

    def keys(self) -> List[str]:
        return list(self._to_dict().keys())

    def replace(self, **overrides) -> "FrontendConfig":
        """ Copy with some settings changed.

        Raises:
            KeyError: If an override names an unknown setting.
        """
        attributes = self._to_dict()
        unknown = set(overrides) - set(attributes)
        if unknown:
            raise KeyError(f"Unknown front-end settings {sorted(unknown)}.")
        attributes.update(overrides)
        if "lda_q_max" not in overrides and "q_max" in overrides:
            attributes["lda_q_max"] = None
        if "controller_width" not in overrides:
            attributes["controller_width"] = None
        return self._from_dict(attributes)

    @classmethod
    def from_preset(cls, name: str, preset_dir: str = PRESET_DIR, **overrides) -> "FrontendConfig":
        """ Load a named variant shipped with the package.

        Args:
            name (str): Preset file name without the .json extension.
            preset_dir (str): Directory of preset files, relative to this
                module.
            overrides: Settings applied on top of the preset.
        """
        path = os.path.join(os.path.dirname(__file__), preset_dir, name + ".json")
        if not os.path.exists(path):
            raise ValueError(f"Unknown front-end preset {name}. Choose from {VARIANTS}.")
        with open(path) as f:
            settings = json.load(f)
        settings.update(overrides)
        return cls(**settings)

    def _to_dict(self) -> Dict[str, Any]:
        return {
            "n_filters": self.n_filters,
            "diff_order": self.diff_order,
            "filter_len": self.filter_len,
            "frame_len_ms": self.frame_len_ms,
            "sample_rate": self.sample_rate,
            "f_lo": self.f_lo,
            "f_hi": self.f_hi,
            "fixed_q": self.fixed_q,
            "q_min": self.q_min,
            "q_max": self.q_max,
            "q_init": self.q_init,
            "lda_enabled": self.lda_enabled,
            "lda_e_lo": self.lda_e_lo,
            "lda_e_hi": self.lda_e_hi,
            "lda_q_min": self.lda_q_min,
            "lda_q_max": self.lda_q_max,
            "lda_source": self.lda_source,
            "fixed_layer_enabled": self.fixed_layer_enabled,
            "afc_enabled": self.afc_enabled,
            "afc_input": self.afc_input,
            "controller_width": self.controller_width,
            "bn_momentum": self.bn_momentum,
            "fm_n_fft": self.fm_n_fft,
            "detach_controller_input": self.detach_controller_input,
            "variant": self.variant,
        }

    @classmethod
    def _from_dict(cls, attribute_dict: Dict[str, Any]) -> "FrontendConfig":
        return cls(**attribute_dict)
