"""layerdump: dump per-layer wav2vec 2.0 activations for layer-wise probing.

Writes one directory per utterance containing ``layer_<i>.npy`` float32
matrices (index 0 = conv encoder output, 1..L = transformer layers) with
JSON sidecars carrying the frame timing, plus a forced-alignment converter
that emits the matching 5-column TSV.
"""

from .align import ARPABET_39, ConversionSummary, convert_alignments, map_phone, parse_textgrid
from .audio import read_wav_16k
from .errors import AudioError, DumpError, ManifestError, PhoneMapError, TextGridError
from .extract import (
    MODEL_TAGS,
    ExtractionSummary,
    UtteranceFailure,
    extract,
    load_model,
    resolve_model_id,
)
from .frames import FrameTiming, conv_stack_timing, n_output_frames
from .manifest import ExtractionManifest, read_uttlist

__version__ = "0.1.0"

__all__ = [
    "ARPABET_39",
    "MODEL_TAGS",
    "AudioError",
    "ConversionSummary",
    "DumpError",
    "ExtractionManifest",
    "ExtractionSummary",
    "FrameTiming",
    "ManifestError",
    "PhoneMapError",
    "TextGridError",
    "UtteranceFailure",
    "conv_stack_timing",
    "convert_alignments",
    "extract",
    "load_model",
    "map_phone",
    "n_output_frames",
    "parse_textgrid",
    "read_uttlist",
    "read_wav_16k",
    "resolve_model_id",
    "__version__",
]
