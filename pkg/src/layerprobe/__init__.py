"""Non-parametric probes for layer-wise analysis of speech representation models."""

__version__ = "0.1.0"

from .cca import cca_similarity, fit_cca, layer_curve, pwcca
from .cluster_mi import KMeansConfig, fit_kmeans, mi_probe, mutual_information
from .dsp import FbankConfig, align_streams, log_mel_spectrogram, read_wav
from .errors import (
    AlignmentError,
    CoverageError,
    DataError,
    FormatError,
    InputError,
    MissingUtteranceError,
    ProbeError,
    RangeError,
    ShapeError,
    UndefinedError,
    UnsupportedError,
)
from .pipeline import (
    EXPERIMENTS,
    ExperimentConfig,
    LayerReport,
    discover_layers,
    emit_report,
    load_config,
    load_report,
    run_experiment,
    selftest,
)
from .scoring import average_precision, spearman, word_discrimination_ap, word_similarity_eval
from .segments import PooledSet, SamplePlan, build_pooled_set, draw_sample_sets, type_embeddings
from .tensor_io import (
    FeatureMatrix,
    FrameSpec,
    SegmentRecord,
    read_alignments,
    read_matrix,
    write_alignments,
    write_matrix,
)
