import logging
import math

import numpy as np
import pytest
from PIL import Image

from rustico.commands import configure_operator
from rustico.common.logger import ROOT_LOGGER
from rustico.config import OperatorParams
from rustico.filters.cosfire import CosfireFilter, Tuple4

# Table 1, TB-roses-1 row
TB_ROSES = dict(sigma=2.5, rho_max=16, sigma0=3, alpha=0.1, lam=0.5, xi=1.5)


def save_gray(path, image, mode='L'):
    """
    write a [0, 1] float image as an 8 bit (or 16 bit with ``mode='I;16'``) file, format from the suffix
    """
    image = np.asarray(image, dtype=np.float64)
    if mode == 'I;16':
        data = np.rint(image * 65535).astype(np.uint16)
    else:
        data = np.rint(image * 255).astype(np.uint8)
    Image.fromarray(data).save(str(path))
    return path


def save_mask(path, mask):
    Image.fromarray(np.where(mask, 255, 0).astype(np.uint8)).save(str(path))
    return path


@pytest.fixture
def rng():
    return np.random.RandomState(20190415)


@pytest.fixture(scope='session')
def small_params():
    return OperatorParams(sigma=1.5, rho_max=4, sigma0=1.0, alpha=0.5, lam=0.5, xi=1.5)


@pytest.fixture(scope='session')
def small_operator(small_params):
    return configure_operator(small_params)


@pytest.fixture(scope='session')
def tb_params():
    return OperatorParams(**TB_ROSES)


@pytest.fixture(scope='session')
def tb_operator(tb_params):
    return configure_operator(tb_params)


@pytest.fixture
def three_tuple_filter():
    return CosfireFilter((Tuple4(1, 1.0, 0.0, 0.0), Tuple4(1, 1.0, 2.0, 0.0), Tuple4(1, 1.0, 2.0, math.pi)),
                         sigma0=0.5, alpha=0.5)


@pytest.fixture(autouse=True)
def detached_logging():
    # main() attaches a handler to the captured stderr of the running test
    yield
    logger = logging.getLogger(ROOT_LOGGER)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
    logger.setLevel(logging.NOTSET)
    logger.propagate = True
