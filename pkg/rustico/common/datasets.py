__package__ = 'rustico.common'

import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

import numpy as np

from .errors import DatasetError, ItemError, ParameterError
from .logger import get_logger
from .raster import load_image, load_mask
from .wheel import as_path, load_json

logger = get_logger(__name__)

TB_ROSES_1 = 'tb_roses_1'
CRACKTREE206 = 'cracktree206'
DRIVE = 'drive'

CHANNELS = ('green', 'luminance')
SPLITS = ('test', 'training')
MANIFEST = 'manifest.json'

IMAGE_SUFFIXES = ('.png', '.jpg', '.jpeg', '.tif', '.tiff', '.bmp', '.gif', '.pgm', '.ppm', '.pbm')


@dataclass
class DatasetItem:
    """
    one image of a dataset with whatever ground truth the layout provides. Every mask has the image shape.
    """
    id: str
    image: np.ndarray
    gt_centerline: Optional[np.ndarray] = None
    gt_segmentation: Optional[np.ndarray] = None
    fov: Optional[np.ndarray] = None
    path: Optional[str] = None

    @property
    def evaluable(self):
        return self.gt_centerline is not None or self.gt_segmentation is not None


@dataclass(frozen=True)
class Layout:
    """
    on-disk layout of a dataset, relative to its root.

    ``images`` is the image directory; ground truth entries are file templates where ``{id}`` is the item id,
    ``{split}`` the DRIVE split and ``*`` matches any suffix. The id of an image is its file stem, cut at the
    first ``id_separator`` when one is set. ``required`` names the ground truth fields an item must have,
    ``any_of`` fields of which at least one must be present.
    """
    name: str
    images: str
    gt_centerline: Optional[str] = None
    gt_segmentation: Optional[str] = None
    fov: Optional[str] = None
    id_separator: Optional[str] = None
    required: tuple = ()
    any_of: tuple = ()
    ids: Optional[tuple] = None

    def resolve(self, template, **kw):
        return template.format(**kw)

    def with_manifest(self, manifest):
        """
        a copy with the keys of a ``manifest.json`` document applied
        """
        known = {'images', 'gt_centerline', 'gt_segmentation', 'fov', 'id_separator', 'ids'}
        unknown = sorted(set(manifest) - known)
        if unknown:
            raise DatasetError('unknown manifest key(s): %s (expected %s)' % (', '.join(unknown), ', '.join(sorted(known))))
        changes = dict(manifest)
        if changes.get('ids') is not None:
            changes['ids'] = tuple(str(x) for x in changes['ids'])
        return replace(self, **changes)


LAYOUTS = {
    TB_ROSES_1: Layout(TB_ROSES_1, 'images', gt_centerline='gt_centerline/{id}.*',
                       gt_segmentation='gt_segmentation/{id}.*', any_of=('gt_centerline', 'gt_segmentation')),
    CRACKTREE206: Layout(CRACKTREE206, 'image', gt_centerline='gt/{id}.*', required=('gt_centerline',)),
    DRIVE: Layout(DRIVE, '{split}/images', gt_segmentation='{split}/1st_manual/{id}_manual1.*',
                  fov='{split}/mask/{id}_{split}_mask.*', id_separator='_', required=('gt_segmentation', 'fov')),
}


def get_layout(name):
    try:
        return LAYOUTS[name]
    except KeyError:
        raise ParameterError('unknown dataset layout %r (expected %s)' % (name, ', '.join(sorted(LAYOUTS))))


def _find_one(root, pattern):
    matches = sorted(p for p in root.glob(pattern) if p.is_file())
    if not matches:
        return None
    if len(matches) > 1:
        raise DatasetError('%d files match %s: %s' % (len(matches), pattern, ', '.join(p.name for p in matches)))
    return matches[0]


class DatasetStream(object):
    """
    lazy, restartable sequence of :py:class:`DatasetItem` in lexicographic id order.

    an item that fails to load (missing or unreadable ground truth, dimension mismatch) is logged, recorded in
    ``errors`` as an :py:class:`~rustico.common.errors.ItemError` and skipped. If a pass yields no item at all a
    :py:class:`~rustico.common.errors.DatasetError` summarizing the failures is raised at its end.

    usage::

        stream = load_dataset('/data/DRIVE', 'drive', channel='green', invert=True)
        for item in stream:
            ...
        print(stream.errors)
    """

    def __init__(self, root, layout, channel='luminance', invert=False, split='test'):
        if channel not in CHANNELS:
            raise ParameterError('unknown channel %r (expected %s)' % (channel, ', '.join(CHANNELS)))
        if split not in SPLITS:
            raise ParameterError('unknown split %r (expected %s)' % (split, ', '.join(SPLITS)))
        self.root = as_path(root)
        if not self.root.is_dir():
            raise DatasetError('dataset root %s is not a directory' % self.root)
        self.layout = layout if isinstance(layout, Layout) else get_layout(layout)
        manifest = self.root / MANIFEST
        if manifest.is_file():
            try:
                self.layout = self.layout.with_manifest(load_json(manifest))
            except ValueError as e:
                raise DatasetError('malformed %s: %s' % (manifest, e))
            logger.info('layout overridden by %s', manifest)
        self.channel = channel
        self.invert = invert
        self.split = split
        self.errors = []

    def image_dir(self):
        return self.root / self.layout.resolve(self.layout.images, split=self.split)

    def item_id(self, path):
        stem = path.stem
        if self.layout.id_separator:
            stem = stem.split(self.layout.id_separator)[0]
        return stem

    def index(self):
        """
        ``[(id, image path)]`` sorted by id
        """
        directory = self.image_dir()
        if not directory.is_dir():
            return []
        found = {}
        for p in directory.iterdir():
            if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES:
                found.setdefault(self.item_id(p), []).append(p)
        wanted = self.layout.ids
        if wanted is not None:
            for k in sorted(set(wanted) - set(found)):
                self.errors.append(ItemError(k, 'listed in the manifest but no image found'))
            found = {k: v for k, v in found.items() if k in set(wanted)}
        index = []
        for k in sorted(found):
            if len(found[k]) > 1:
                self.errors.append(ItemError(k, 'several images: %s' % ', '.join(sorted(p.name for p in found[k]))))
                continue
            index.append((k, found[k][0]))
        return index

    def _ground_truth(self, item_id, field):
        template = getattr(self.layout, field)
        if template is None:
            return None
        path = _find_one(self.root, self.layout.resolve(template, id=item_id, split=self.split))
        if path is None:
            if field in self.layout.required:
                raise DatasetError('missing %s (%s)' % (field, template))
            return None
        return load_mask(path)

    def load(self, item_id, path):
        image = load_image(path, self.channel)
        if self.invert:
            image = 1.0 - image
        masks = {f: self._ground_truth(item_id, f) for f in ('gt_centerline', 'gt_segmentation', 'fov')}
        for f, m in masks.items():
            if m is not None and m.shape != image.shape:
                raise DatasetError('%s is %dx%d but the image is %dx%d'
                                   % (f, m.shape[1], m.shape[0], image.shape[1], image.shape[0]))
        if self.layout.any_of and all(masks[f] is None for f in self.layout.any_of):
            raise DatasetError('no ground truth (%s)' % ' or '.join(self.layout.any_of))
        return DatasetItem(item_id, image, path=str(path), **masks)

    def __iter__(self):
        self.errors = []
        count = 0
        for item_id, path in self.index():
            try:
                item = self.load(item_id, path)
            except DatasetError as e:
                logger.warning('skipping %s: %s', item_id, e)
                self.errors.append(ItemError(item_id, str(e)))
                continue
            count += 1
            yield item
        if count == 0:
            detail = '; '.join(str(e) for e in self.errors) or 'no image in %s' % self.image_dir()
            raise DatasetError('%s layout at %s gave no item: %s' % (self.layout.name, self.root, detail))


def load_dataset(root, layout, channel='luminance', invert=False, split='test'):
    """
    :param root: dataset root directory (see ``docs/datasets.rst`` for the expected layouts)
    :param layout: ``tb_roses_1``, ``cracktree206``, ``drive`` or a :py:class:`Layout`
    :param str channel: ``green`` or ``luminance`` for color images
    :param bool invert: map ``v`` to ``1 - v`` so that dark structures become bright
    :param str split: DRIVE split, ``test`` or ``training``
    :return: :py:class:`DatasetStream`
    """
    return DatasetStream(root, layout, channel, invert, split)


# synthetic fixtures ------------------------------------------------------------------------------------

FIXTURE_KINDS = ('bar', 'crossed_bars', 'bar_plus_texture', 'curve')


class Fixture(NamedTuple):
    """
    synthetic image, its exact ground truth centerline and named region masks
    """
    image: np.ndarray
    centerline: np.ndarray
    regions: dict


def _bar(shape, center, length, width, angle):
    # (row, col) grids; the bar runs along (cos a, -sin a) in (col, row) coordinates
    rows, cols = np.mgrid[0:shape[0], 0:shape[1]].astype(np.float64)
    dc, dr = cols - center[1], rows - center[0]
    along = dc * math.cos(angle) - dr * math.sin(angle)
    across = dc * math.sin(angle) + dr * math.cos(angle)
    inside = np.abs(along) <= length / 2.0
    return inside & (np.abs(across) <= width / 2.0), inside & (np.abs(across) <= 0.5)


def _noisy(image, noise, seed):
    if noise <= 0:
        return image
    rng = np.random.RandomState(seed)
    return np.clip(image + rng.normal(0.0, noise, image.shape), 0.0, 1.0)


def _fixture_bar(p, seed):
    size = int(p.get('size', 101))
    c = (size // 2, size // 2)
    bar, line = _bar((size, size), c, float(p.get('length', 40)), float(p.get('width', 3)), float(p.get('angle', 0.0)))
    image = _noisy(bar.astype(np.float64), float(p.get('noise', 0.0)), seed)
    return Fixture(image, line, {'bar': bar})


def _fixture_crossed_bars(p, seed):
    size = int(p.get('size', 101))
    c = (size // 2, size // 2)
    length, width = float(p.get('length', 60)), float(p.get('width', 3))
    angles = p.get('angles', (0.0, math.pi / 2))
    bars, lines = zip(*(_bar((size, size), c, length, width, float(a)) for a in angles))
    bar, line = np.logical_or.reduce(bars), np.logical_or.reduce(lines)
    image = _noisy(bar.astype(np.float64), float(p.get('noise', 0.0)), seed)
    return Fixture(image, line, {'bar': bar})


def _fixture_bar_plus_texture(p, seed):
    # left half: bright vertical bar on mid gray; right half: {0, 1} checkerboard of period 2 cells
    height, half = int(p.get('height', 64)), int(p.get('half_width', 80))
    width, cell, margin = int(p.get('width', 5)), int(p.get('cell', 1)), int(p.get('margin', 16))
    image = np.full((height, 2 * half), 0.5)
    col = half // 2
    image[:, col - width // 2:col - width // 2 + width] = 1.0
    rows, cols = np.mgrid[0:height, 0:half]
    image[:, half:] = ((rows // cell + cols // cell) % 2).astype(np.float64)
    image = _noisy(image, float(p.get('noise', 0.0)), seed)
    centerline = np.zeros(image.shape, dtype=bool)
    centerline[:, col] = True
    bar_region = np.zeros(image.shape, dtype=bool)
    bar_region[:, :half] = True
    texture = np.zeros(image.shape, dtype=bool)
    texture[:, half + margin:] = True
    return Fixture(image, centerline, {'bar': bar_region, 'texture': texture})


def _fixture_curve(p, seed):
    # quarter circle of the given radius centred on the top left area, arc in the lower right quadrant
    radius = float(p.get('radius', 30))
    width = float(p.get('width', 3))
    size = int(p.get('size', int(radius) + 21))
    c = (10.0, 10.0)
    rows, cols = np.mgrid[0:size, 0:size].astype(np.float64)
    r = np.hypot(rows - c[0], cols - c[1])
    quadrant = (rows >= c[0]) & (cols >= c[1])
    image = (quadrant & (np.abs(r - radius) <= width / 2.0)).astype(np.float64)
    centerline = quadrant & (np.abs(r - radius) <= 0.5)
    image = _noisy(image, float(p.get('noise', 0.0)), seed)
    return Fixture(image, centerline, {'curve': image > 0})


_FIXTURES = {
    'bar': _fixture_bar,
    'crossed_bars': _fixture_crossed_bars,
    'bar_plus_texture': _fixture_bar_plus_texture,
    'curve': _fixture_curve,
}


def make_fixture(kind, params=None, seed=0):
    """
    deterministic synthetic image with exact ground truth.

    * ``bar``: ``size`` (101), ``length`` (40), ``width`` (3), ``angle`` (0, radians, counter-clockwise)
    * ``crossed_bars``: ``size`` (101), ``length`` (60), ``width`` (3), ``angles`` ((0, pi/2))
    * ``bar_plus_texture``: ``height`` (64), ``half_width`` (80), bar ``width`` (5), checkerboard ``cell`` (1),
      texture region ``margin`` (16) from the halves boundary; regions ``bar`` and ``texture``
    * ``curve``: quarter circle of ``radius`` (30) and ``width`` (3)

    every kind takes ``noise`` (0), the std of additive gaussian noise drawn from ``seed``.

    :return: :py:class:`Fixture`
    """
    try:
        build = _FIXTURES[kind]
    except KeyError:
        raise ParameterError('unknown fixture %r (expected %s)' % (kind, ', '.join(FIXTURE_KINDS)))
    return build(dict(params or {}), seed)
