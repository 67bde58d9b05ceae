"""tvkit: tract variables from articulatory pellet trajectories.

Converts midsagittal pellet kinematics into six vocal-tract constriction
variables via geometric transformation, prepares acoustic features for
speech-inversion training, evaluates predicted TVs with PPMC reports,
and generates synthetic corpora with analytically known ground truth.
"""
from .artic_io import (FeatureMatrix, FormatError, PalatalTrace, PelletFrame,
                       PelletId, PelletTrack, TvFrame, TvTrack,
                       read_feature_matrix, read_palatal_trace,
                       read_pellet_track, read_tv_track, write_feature_matrix,
                       write_palatal_trace, write_pellet_track, write_tv_track)
from .evaluation import (PpmcReport, SplitSpec, evaluate_tracks, improvement,
                         make_split, ppmc)
from .features import (AudioClip, MfccConfig, align_tv_to_rate, extract_mfcc,
                       read_wav, segment_2s, validate_ssl_matrix, znormalize)
from .geometry import (Circle, CollinearError, DistanceWitness,
                       circle_polyline_distance, circumcircle,
                       extend_palatal_trace, point_polyline_distance)
from .synth import SynthConfig, synth_corpus, synth_speaker, synth_utterance
from .tract_variables import (TvConfig, compute_la, compute_lp,
                              compute_tongue_body, compute_tongue_tip,
                              compute_tv_track)

__version__ = "0.1.0"
