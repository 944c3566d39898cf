__package__ = 'rustico.common'

import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pathlib2
from tqdm import tqdm

from .errors import ParameterError

JOBS_ENV = 'RUSTICO_JOBS'


def join_path(*a):
    return os.path.join(*a)


def as_path(path):
    return pathlib2.Path(str(path))


def ensure_dir(path):
    """
    create ``path`` (and parents) if needed and return it as a ``Path``
    """
    path = as_path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path


def canonical_float(value, digits=9):
    """
    round ``value`` to ``digits`` significant digits. Values that go through here print and parse back
    to the very same float, which keeps serialized filters byte-stable.
    """
    value = float(value)
    if value == 0.0:
        return 0.0
    return float('%.*g' % (digits, value))


def sha256_file(path, chunk_size=1 << 20):
    digest = hashlib.sha256()
    with open(str(path), 'rb') as f:
        while True:
            chunk = f.read(chunk_size)
            if not chunk:
                break
            digest.update(chunk)
    return digest.hexdigest()


def dump_json(obj, path):
    """
    write ``obj`` as sorted, indented json with a trailing newline (byte-identical for equal objects)
    """
    text = json.dumps(obj, indent=2, sort_keys=True) + '\n'
    with open(str(path), 'w') as f:
        f.write(text)
    return path


def load_json(path):
    with open(str(path)) as f:
        return json.load(f)


def normalize_by_max(img):
    """
    divide a nonnegative map by its global maximum so that it lies in [0, 1].
    an all-zero map is returned unchanged (as float64).
    """
    img = np.asarray(img, dtype=np.float64)
    peak = img.max() if img.size else 0.0
    if peak > 0:
        return img / peak
    return img.copy()


def default_jobs():
    """
    worker count from the ``RUSTICO_JOBS`` environment variable, 1 if unset
    """
    value = os.environ.get(JOBS_ENV)
    if not value:
        return 1
    try:
        jobs = int(value)
    except ValueError:
        raise ParameterError('%s must be an integer, got %r' % (JOBS_ENV, value))
    if jobs < 1:
        raise ParameterError('%s must be >= 1, got %d' % (JOBS_ENV, jobs))
    return jobs


def ordered_map(func, items, jobs=1, desc=None, progress=False):
    """
    ``[func(x) for x in items]`` on a thread pool of ``jobs`` workers.

    results are returned in the order of ``items`` whatever the completion order is.
    torch and scipy release the GIL inside their kernels, so threads do scale here.

    usage::

        maps = ordered_map(lambda item: operator_response(op, item.image), items, jobs=4, desc='apply')
    """
    items = list(items)
    bar = tqdm(total=len(items), desc=desc, disable=not progress, leave=False)
    try:
        if jobs <= 1 or len(items) <= 1:
            results = []
            for x in items:
                results.append(func(x))
                bar.update(1)
            return results
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(func, x) for x in items]
            for future in futures:
                future.add_done_callback(lambda _: bar.update(1))
            return [future.result() for future in futures]
    finally:
        bar.close()
