"""
adafe Tutorial: Lesson 1
Filters and Q traces
--

In this first lesson we look at the Gabor filters the front-end is built from, then run the adaptive front-end
over an amplitude-modulated tone and follow how the Q-factor of a few channels reacts to the level of the input.
"""
import numpy as np
import matplotlib.pyplot as plt

from adafe.analysis import q_energy_correlation, summarize_correlation
from adafe.analysis.plotting import plot_q_trace, plot_responses
from adafe.audio import Waveform
from adafe.frontend import Frontend, FrontendConfig
from adafe.gabor import GaborFilterSpec, response_table, synth_gabor

# -- Gabor filters -----------------------------------------------------------------------------------------------------
# A higher Q gives a narrower filter with a higher gain at its center frequency. Without normalization the gain
# grows in proportion to Q, which is what lets the front-end trade sensitivity for selectivity frame by frame.
filters = {
    f"q{q:g}": synth_gabor(GaborFilterSpec(3000.0, q), normalize=False) for q in (1.5, 2.0, 2.5)
}
table = response_table(filters)
plot_responses(table)
plt.title("Gabor filters at 3 kHz")

# -- Input -------------------------------------------------------------------------------------------------------------
# One second of a 1 kHz tone whose amplitude swings between -40 and 0 dB FS four times.
fs = 16000
t = np.arange(fs) / fs
envelope_db = -20 + 20 * np.sin(2 * np.pi * 4 * t)
samples = 10 ** (envelope_db / 20) * np.sin(2 * np.pi * 1000 * t)
tone = Waveform(samples, fs, "am_tone")

# -- Front-end ---------------------------------------------------------------------------------------------------------
# The 'ada_fe' preset enables both the level-dependent rule and the feedback controller. The controller is
# untrained here, so the Q movement we see comes mostly from the level rule.
frontend = Frontend(FrontendConfig.from_preset("ada_fe"), seed=0)
subbands, trace = frontend.run_utterance(tone)
print(f"{trace.n_frames} frames, {trace.n_channels} channels")

# -- Analysis ----------------------------------------------------------------------------------------------------------
# Loud frames should lower Q in the following frame, so energy and next-frame Q are negatively correlated.
summary = summarize_correlation(q_energy_correlation(trace, lag=1))
print(
    f"Median energy/Q correlation: {summary['median']:.2f} "
    f"({summary['fraction_negative']:.0%} of {summary['n_channels']} channels negative)"
)

nearest = int(np.argmin(np.abs(trace.channel_centers - 1000)))
plot_q_trace(trace, [nearest - 2, nearest, nearest + 2], frame_ms=frontend.cfg.frame_len_ms)
plt.show()
