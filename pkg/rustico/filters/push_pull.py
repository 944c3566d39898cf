"""
push-pull inhibition: the inhibitory filter, the single-orientation operator
``R = |r_B - xi r_B^|+`` and its multi-orientation maximum superposition.
"""
__package__ = 'rustico.filters'

import math
from dataclasses import dataclass, field

import numpy as np

from ..common.errors import ConfigurationError, ParameterError, require
from ..common.logger import get_logger
from ..common.wheel import canonical_float, dump_json, load_json
from .cosfire import CosfireFilter, Tuple4, cosfire_response, rotate_filter
from .dog import DoGResponseBank

logger = get_logger(__name__)

DEFAULT_ORIENTATIONS = 12


def derive_inhibitor(f, lam):
    """
    ``B^_lambda``: every tuple gets its polarity flipped and its sigma multiplied by ``lam``;
    rho, phi, sigma0 and alpha are kept.
    """
    if not lam > 0:
        raise ParameterError('lambda must be > 0, got %r' % (lam,))
    tuples = tuple(Tuple4(-t.delta, t.sigma * lam, t.rho, t.phi) for t in f.tuples)
    return CosfireFilter(tuples, f.sigma0, f.alpha)


def orientation_set(count):
    """
    ``count`` equally spaced orientations ``k pi / count`` over [0, pi)
    """
    count = int(count)
    require(count >= 1, 'need at least one orientation, got %d' % count)
    return tuple(k * math.pi / count for k in range(count))


@dataclass(frozen=True)
class RusticoOperator:
    """
    excitatory filter ``B`` paired with its inhibitor ``B^_lambda`` (derived, never given), inhibition
    strength ``xi`` and the orientation offsets ``orientations`` (radians, distinct, in [0, pi)).
    """
    excitatory: CosfireFilter
    lam: float
    xi: float
    orientations: tuple = field(default_factory=lambda: orientation_set(DEFAULT_ORIENTATIONS))
    inhibitory: CosfireFilter = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        require(self.lam > 0, 'lambda must be > 0, got %r' % (self.lam,))
        require(self.xi >= 0, 'xi must be >= 0, got %r' % (self.xi,))
        orientations = tuple(float(psi) for psi in self.orientations)
        require(len(orientations) >= 1, 'orientation set must not be empty')
        require(len(set(orientations)) == len(orientations), 'orientations must be distinct')
        require(all(0 <= psi < math.pi for psi in orientations), 'orientations must lie in [0, pi)')
        object.__setattr__(self, 'lam', canonical_float(self.lam))
        object.__setattr__(self, 'xi', canonical_float(self.xi))
        object.__setattr__(self, 'orientations', orientations)
        object.__setattr__(self, 'inhibitory', derive_inhibitor(self.excitatory, self.lam))

    @staticmethod
    def create(excitatory, lam, xi, orientation_count=DEFAULT_ORIENTATIONS):
        return RusticoOperator(excitatory, lam, xi, orientation_set(orientation_count))

    def without_inhibition(self):
        """
        the same operator with ``xi = 0``, i.e. the plain multi-orientation COSFIRE filter
        """
        return RusticoOperator(self.excitatory, self.lam, 0.0, self.orientations)

    def rotated(self, psi):
        """
        the pair ``(B^psi, B^^psi_lambda)``
        """
        return rotate_filter(self.excitatory, psi), rotate_filter(self.inhibitory, psi)

    def to_dict(self):
        """
        the excitatory filter document plus ``lambda``, ``xi`` and ``psi_count``; the inhibitor is re-derived on load
        """
        d = self.excitatory.to_dict()
        d.update({'lambda': self.lam, 'xi': self.xi, 'psi_count': len(self.orientations)})
        return d

    @staticmethod
    def from_dict(d):
        try:
            lam, xi, count = float(d['lambda']), float(d['xi']), int(d['psi_count'])
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigurationError('malformed operator document: %s' % e)
        return RusticoOperator.create(CosfireFilter.from_dict(d), lam, xi, count)

    def save(self, path):
        return dump_json(self.to_dict(), path)

    @staticmethod
    def load(path):
        return RusticoOperator.from_dict(load_json(path))


def combine_push_pull(excitation, inhibition, xi):
    """
    ``max(0, excitation - xi * inhibition)`` pixelwise
    """
    return np.maximum(excitation - xi * inhibition, 0.0)


def rustico_response(op, img, psi=0.0, bank=None):
    """
    single-orientation response of ``op`` rotated by ``psi``: ``|r_B^psi - xi r_B^^psi|+``.

    with ``xi = 0`` the inhibitory pathway is not evaluated and the result is ``r_B^psi`` itself.
    """
    bank = bank if bank is not None else DoGResponseBank(img)
    excitatory, inhibitory = op.rotated(psi)
    excitation = cosfire_response(excitatory, bank.image, bank)
    if op.xi == 0:
        return excitation
    inhibition = cosfire_response(inhibitory, bank.image, bank)
    return combine_push_pull(excitation, inhibition, op.xi)


def multi_orientation_response(op, img, bank=None):
    """
    pixelwise maximum over ``psi`` in ``op.orientations`` of :py:func:`rustico_response`.

    all orientations share one :py:class:`DoGResponseBank`: rotation only changes phi, so the DoG maps and the
    blurred maps are computed once per ``(delta, sigma)`` and per blur sigma.
    """
    bank = bank if bank is not None else DoGResponseBank(img)
    out = None
    for psi in op.orientations:
        r = rustico_response(op, bank.image, psi, bank)
        out = r if out is None else np.maximum(out, r)
    logger.debug('%d orientation(s), %d DoG map(s), %d blurred map(s)', len(op.orientations), bank.misses,
                 bank.blur_misses)
    return out
