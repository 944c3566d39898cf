__package__ = 'rustico.common'


class RusticoError(Exception):
    """
    base class of every error raised by rustico
    """


class ParameterError(RusticoError, ValueError):
    """
    a numeric parameter is outside its valid range (``sigma <= 0``, ``lambda <= 0``, threshold outside (0, 1], ...)
    """


class ConfigurationError(RusticoError):
    """
    a filter could not be configured from its prototype, or a run config document is invalid
    """


class DatasetError(RusticoError, IOError):
    """
    an image or a ground truth could not be read, or does not match the documented layout
    """


class EvaluationError(RusticoError):
    """
    evaluation inputs are inconsistent (dimension mismatch, undefined metric, unmatched ids)
    """


class ItemError(object):
    """
    record of a failure on one item of a stream; the stream itself goes on.
    """

    def __init__(self, item_id, reason):
        self.item_id = item_id
        self.reason = reason

    def __str__(self):
        return '%s: %s' % (self.item_id, self.reason)

    def __repr__(self):
        return 'ItemError(%r, %r)' % (self.item_id, self.reason)


def require(condition, message, error=ParameterError):
    """
    raise ``error(message)`` unless ``condition`` holds
    """
    if not condition:
        raise error(message)
