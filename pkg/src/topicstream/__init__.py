"""Topic detection over post streams with frequent-pattern, embedding-clustering and hybrid detectors."""

__version__ = "0.1.0"

from .errors import ConfigError, DataError, TopicStreamError  # noqa: E402
from .topics import Topic  # noqa: E402

__all__ = ["ConfigError", "DataError", "Topic", "TopicStreamError", "__version__"]
