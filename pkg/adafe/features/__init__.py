from .envelope import (
    spectral_envelope,
    centroid_magnitude,
    envelope_freqs,
    octave_bins,
    InvalidOctave,
    OCTAVES,
)
from .features import (
    FrameFeatures,
    FeatureSequence,
    frame_features,
    features_op,
    flatten_op,
    sequence_features,
    N_FEATURES_PER_CHANNEL,
)
from .files import (
    feature_bytes,
    parse_feature_bytes,
    read_feature_file,
    write_feature_file,
    write_feature_csv,
    MalformedFeatureFile,
)
