"""Exception hierarchy shared by the library and the command line."""


class TopicStreamError(Exception):
    """Base class for all errors raised by topicstream."""


class DataError(TopicStreamError):
    """Input data is unreadable, malformed or inconsistent (CLI exit code 2)."""


class ConfigError(TopicStreamError):
    """Invalid configuration or usage (CLI exit code 1)."""
