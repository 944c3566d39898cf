__package__ = 'rustico.common'

import logging
import sys

ROOT_LOGGER = 'rustico'
LOG_FORMAT = '[rustico] %(levelname)s %(message)s'


def get_logger(name=None):
    """
    logger below the ``rustico`` hierarchy. Library modules call ``get_logger(__name__)``.

    nothing is configured here: without :py:func:`setup_logging` records propagate to whatever the
    application configured (or are dropped by python's last-resort handler below WARNING).
    """
    if not name or name == ROOT_LOGGER:
        return logging.getLogger(ROOT_LOGGER)
    if not name.startswith(ROOT_LOGGER + '.'):
        name = ROOT_LOGGER + '.' + name
    return logging.getLogger(name)


def setup_logging(verbosity=0, stream=None):
    """
    attach one stderr handler to the ``rustico`` logger. Called by the command line entry point.

    :param int verbosity: ``< 0`` warnings only, ``0`` info, ``> 0`` debug
    :param stream: defaults to ``sys.stderr`` so that stdout stays free for tables
    """
    logger = logging.getLogger(ROOT_LOGGER)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
    handler = logging.StreamHandler(stream or sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logger.addHandler(handler)
    if verbosity < 0:
        logger.setLevel(logging.WARNING)
    elif verbosity == 0:
        logger.setLevel(logging.INFO)
    else:
        logger.setLevel(logging.DEBUG)
    logger.propagate = False
    return logger
