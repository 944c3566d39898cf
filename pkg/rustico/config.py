"""
run configuration: operator, dataset and evaluation parameters of one reproducible run, read from and written
to JSON (see ``presets/run_config.schema.json``).
"""
__package__ = 'rustico'

import math
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

from .common.datasets import CHANNELS, LAYOUTS, SPLITS
from .common.errors import ConfigurationError, ParameterError
from .common.raster import kernel_radius
from .common.wheel import dump_json, load_json
from .evaluation.metrics import CHEBYSHEV, EUCLIDEAN, GRID_STEPS
from .evaluation.report import METRIC_COLUMNS
from .filters.cosfire import DEFAULT_FRACTION
from .filters.dog import CENTER_OFF, CENTER_ON

# JSON key -> field name where they differ (``lambda`` is a python keyword)
RENAMED = {'lambda': 'lam'}

# prototype canvas margin beyond the DoG support
CANVAS_MARGIN = 2


def _positive(name, value):
    if not value > 0:
        raise ParameterError('%s must be > 0, got %r' % (name, value))


def _nonnegative(name, value):
    if not value >= 0:
        raise ParameterError('%s must be >= 0, got %r' % (name, value))


def _from_dict(cls, d, where):
    if not isinstance(d, dict):
        raise ConfigurationError('%s must be an object, got %s' % (where, type(d).__name__))
    names = {f.name for f in fields(cls)}
    kw = {}
    for key, value in d.items():
        name = RENAMED.get(key, key)
        if name not in names:
            raise ConfigurationError('unknown key %s.%s' % (where, key))
        kw[name] = value
    try:
        return cls(**kw)
    except TypeError as e:
        raise ConfigurationError('%s: %s' % (where, e))


def _to_dict(obj):
    inverse = {v: k for k, v in RENAMED.items()}
    return {inverse.get(k, k): v for k, v in asdict(obj).items()}


@dataclass(frozen=True)
class OperatorParams:
    """
    ``sigma`` is the DoG std of every excitatory tuple, ``rho_max`` the largest circle radius; circles are
    ``0, rho_step, 2 rho_step, ... <= rho_max``.
    """
    sigma: float
    rho_max: float
    sigma0: float
    alpha: float
    lam: float
    xi: float
    rho_step: float = 2.0
    orientations: int = 12
    polarity: int = CENTER_ON
    fraction: float = DEFAULT_FRACTION
    prototype_width: int = 1

    def __post_init__(self):
        _positive('sigma', self.sigma)
        _nonnegative('rho_max', self.rho_max)
        _positive('rho_step', self.rho_step)
        _nonnegative('sigma0', self.sigma0)
        _nonnegative('alpha', self.alpha)
        _positive('lambda', self.lam)
        _nonnegative('xi', self.xi)
        if int(self.orientations) != self.orientations or self.orientations < 1:
            raise ParameterError('orientations must be an integer >= 1, got %r' % (self.orientations,))
        if self.polarity not in (CENTER_ON, CENTER_OFF):
            raise ParameterError('polarity must be +1 or -1, got %r' % (self.polarity,))
        if not 0 < self.fraction <= 1:
            raise ParameterError('fraction must lie in (0, 1], got %r' % (self.fraction,))
        if int(self.prototype_width) != self.prototype_width or self.prototype_width < 1:
            raise ParameterError('prototype_width must be an integer >= 1, got %r' % (self.prototype_width,))

    def radii(self):
        count = int(math.floor(self.rho_max / self.rho_step + 1e-9))
        return [k * float(self.rho_step) for k in range(count + 1)]

    @property
    def prototype_length(self):
        return 2 * int(math.ceil(self.rho_max)) + 1

    @property
    def canvas(self):
        return self.prototype_length + 2 * (kernel_radius(self.sigma) + CANVAS_MARGIN)


@dataclass(frozen=True)
class DatasetParams:
    layout: str
    root: str
    channel: str = 'luminance'
    invert: bool = False
    split: str = 'test'

    def __post_init__(self):
        if self.layout not in LAYOUTS:
            raise ParameterError('unknown layout %r (expected %s)' % (self.layout, ', '.join(sorted(LAYOUTS))))
        if self.channel not in CHANNELS:
            raise ParameterError('unknown channel %r (expected %s)' % (self.channel, ', '.join(CHANNELS)))
        if self.split not in SPLITS:
            raise ParameterError('unknown split %r (expected %s)' % (self.split, ', '.join(SPLITS)))


@dataclass(frozen=True)
class EvaluationParams:
    """
    ``threshold_grid`` is the number of equal steps of the sweep over (0, 1] (100: ``0.01 .. 1.00``)
    """
    metric_set: str = 'centerline'
    d_star: float = 2.0
    distance: str = EUCLIDEAN
    threshold_grid: int = GRID_STEPS

    def __post_init__(self):
        if self.metric_set not in METRIC_COLUMNS:
            raise ParameterError('unknown metric_set %r (expected %s)' % (self.metric_set, ', '.join(METRIC_COLUMNS)))
        _nonnegative('d_star', self.d_star)
        if self.distance not in (EUCLIDEAN, CHEBYSHEV):
            raise ParameterError('unknown distance %r (expected %s or %s)' % (self.distance, EUCLIDEAN, CHEBYSHEV))
        if int(self.threshold_grid) != self.threshold_grid or self.threshold_grid < 1:
            raise ParameterError('threshold_grid must be an integer >= 1, got %r' % (self.threshold_grid,))


@dataclass(frozen=True)
class RunConfig:
    """
    everything a run depends on. Round-trips through :py:meth:`to_dict` / :py:meth:`from_dict` unchanged.

    usage::

        config = RunConfig.load('presets/tb_roses_1.json')
        config.operator.radii()  # [0.0, 2.0, ..., 16.0]
    """
    operator: OperatorParams
    evaluation: EvaluationParams = field(default_factory=EvaluationParams)
    dataset: Optional[DatasetParams] = None
    output: str = 'out'

    @staticmethod
    def from_dict(d):
        if not isinstance(d, dict):
            raise ConfigurationError('a run config is a JSON object')
        unknown = sorted(set(d) - {'operator', 'evaluation', 'dataset', 'output'})
        if unknown:
            raise ConfigurationError('unknown key(s): %s' % ', '.join(unknown))
        if 'operator' not in d:
            raise ConfigurationError('missing key: operator')
        operator = _from_dict(OperatorParams, d['operator'], 'operator')
        evaluation = _from_dict(EvaluationParams, d.get('evaluation', {}), 'evaluation')
        dataset = None if d.get('dataset') is None else _from_dict(DatasetParams, d['dataset'], 'dataset')
        return RunConfig(operator, evaluation, dataset, str(d.get('output', 'out')))

    def to_dict(self):
        return {
            'operator': _to_dict(self.operator),
            'evaluation': _to_dict(self.evaluation),
            'dataset': None if self.dataset is None else _to_dict(self.dataset),
            'output': self.output,
        }

    @staticmethod
    def load(path):
        try:
            d = load_json(path)
        except ValueError as e:
            raise ConfigurationError('%s is not valid JSON: %s' % (path, e))
        return RunConfig.from_dict(d)

    def save(self, path):
        return dump_json(self.to_dict(), path)
