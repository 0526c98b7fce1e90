from .waveform import Waveform, FrameSequence, EmptyAudio
from .wav import (
    decode_wav,
    encode_wav,
    read_raw,
    write_raw,
    load_audio,
    MalformedHeader,
    UnsupportedEncoding,
)
from .resample import ensure_16k, UnsupportedRate, TARGET_RATE, ACCEPTED_RATES
from .framing import frame_signal, concatenate_frames, frame_length_samples
