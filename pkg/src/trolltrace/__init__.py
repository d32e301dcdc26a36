"""Detection of state-sponsored troll accounts from tweet dumps.

Accounts are reduced to 45 behavioural features (metadata, posting hours,
writing style, posting clients) and scored with standard classifiers.
"""
from importlib.metadata import PackageNotFoundError, version as _version

try:
    __version__ = _version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .corpus import Account, Corpus, DataError, Tweet, load_any, read_corpus, write_corpus
from .features import FEATURE_NAMES, Dataset, build_dataset, extract_features
from .sources import SourceCatalog, classify_source, default_catalog, is_fake_source

__all__ = [
    "Account",
    "Corpus",
    "DataError",
    "Dataset",
    "FEATURE_NAMES",
    "SourceCatalog",
    "Tweet",
    "build_dataset",
    "classify_source",
    "default_catalog",
    "extract_features",
    "is_fake_source",
    "load_any",
    "read_corpus",
    "write_corpus",
    "__version__",
]
