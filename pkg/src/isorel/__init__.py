"""Cross-lingual semantic relatedness via embedding whitening.

Pipeline: embed sentence pairs, whiten the embedding space to zero mean and
identity covariance (with top-k truncation), score pairs by cosine, evaluate
with Spearman rank correlation, and select source-language training data for
an unlabeled target language by probing each candidate under target-fitted
whitening.
"""

from .corpus import (
    BalanceConfig,
    PairDataset,
    PairRecord,
    balance_language,
    load_dataset,
    save_dataset,
    unique_sentences,
)
from .errors import (
    DatasetParseError,
    DegenerateFitError,
    EmptyTrainingPoolError,
    IsorelError,
    MissingEmbeddingError,
    ProbeError,
    ScoringError,
    TransportError,
    UndefinedCorrelationError,
    UndefinedCosineError,
    ValidationError,
)
from .filtering import (
    FilterReport,
    SourceProbe,
    build_training_set,
    filter_languages,
    filter_report_to_json,
    fit_pool_params,
    predict_target,
    probe_source,
)
from .metrics import (
    HistogramReport,
    average_ranks,
    cosine_similarity,
    histogram,
    score_pairs,
    score_report,
    spearman,
)
from .providers import (
    EmbeddingProvider,
    FileStoreProvider,
    ProviderConfig,
    RemoteProvider,
    ToyProvider,
    load_store,
    make_provider,
    text_key,
    toy_encode,
    write_store,
)
from .whitening import (
    WhiteningParams,
    apply_whitening,
    compute_covariance,
    compute_mean,
    fit_whitening,
    load_params,
    save_params,
)

__version__ = "0.1.0"
