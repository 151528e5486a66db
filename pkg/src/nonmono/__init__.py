"""Non-monotonic reasoning engines for computational trust inference."""

from .evaluation import MODEL_REGISTRY, MetricTriple, ModelConfig, run_matrix, run_model
from .ingest import EditorFeatures, extract_features, stream_revisions
from .kb import KnowledgeBase, load_builtin, parse_kb

__version__ = "0.1.0"

__all__ = [
    "MODEL_REGISTRY",
    "MetricTriple",
    "ModelConfig",
    "run_matrix",
    "run_model",
    "EditorFeatures",
    "extract_features",
    "stream_revisions",
    "KnowledgeBase",
    "load_builtin",
    "parse_kb",
    "__version__",
]
