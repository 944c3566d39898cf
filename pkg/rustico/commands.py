__package__ = 'rustico'

import argparse
import math
import sys
import time

import numpy as np

from .common.datasets import DatasetStream
from .common.errors import (ConfigurationError, DatasetError, EvaluationError, ItemError, ParameterError,
                            RusticoError)
from .common.logger import get_logger, setup_logging
from .common.raster import load_image, save_mask_png, save_response_png
from .common.wheel import (as_path, default_jobs, dump_json, ensure_dir, join_path, normalize_by_max, ordered_map,
                           sha256_file)
from .config import RunConfig
from .evaluation.metrics import cal, skeletonize, sweep_segmentation, sweep_thresholds, threshold_grid, threshold_map
from .evaluation.report import CENTERLINE, SWEEP_CSV, EvalReport, read_report_csv, write_sweep_csv
from .filters.cosfire import configure, render_bar_prototype
from .filters.dog import DoGSpec
from .filters.push_pull import RusticoOperator, multi_orientation_response

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_EVAL = 4

FILTER_JSON = 'filter.json'
RUN_JSON = 'run.json'
RAW_SUFFIX = '_raw'
MASK_SUFFIX = '_mask'


def configure_operator(params):
    """
    render the bar prototype of ``params`` (an :py:class:`~rustico.config.OperatorParams`), configure the
    excitatory filter on it and pair it with its inhibitor.
    """
    prototype = render_bar_prototype(params.prototype_length, params.prototype_width, params.canvas)
    excitatory = configure(prototype, DoGSpec(params.polarity, params.sigma), params.radii(), params.fraction,
                           sigma0=params.sigma0, alpha=params.alpha)
    return RusticoOperator.create(excitatory, params.lam, params.xi, params.orientations)


def operator_response(op, image, inhibition=True):
    """
    raw multi-orientation response; without inhibition this is the plain COSFIRE baseline
    """
    if not inhibition:
        op = op.without_inhibition()
    return multi_orientation_response(op, image)


def tuple_table(f):
    lines = ['%4s %6s %8s %8s %8s %8s' % ('#', 'delta', 'sigma', 'rho', 'phi', 'deg')]
    for i, t in enumerate(f.tuples):
        lines.append('%4d %+6d %8.3f %8.3f %8.4f %8.2f' % (i, t.delta, t.sigma, t.rho, t.phi, math.degrees(t.phi)))
    return '\n'.join(lines)


def _version():
    from . import __version__
    return __version__


def _config(args):
    if not args.config:
        raise ConfigurationError('--config is required')
    return RunConfig.load(args.config)


def _output_dir(args, config):
    return ensure_dir(args.out or config.output)


def _progress():
    return sys.stderr.isatty()


def cmd_configure(args):
    """
    configure the excitatory filter of the run config and write the operator document (filter tuples plus
    ``lambda``, ``xi``, ``psi_count``); the tuple table goes to stdout.
    """
    config = _config(args)
    op = configure_operator(config.operator)
    path = as_path(args.filter) if args.filter else _output_dir(args, config) / FILTER_JSON
    ensure_dir(path.parent)
    op.save(path)
    print(tuple_table(op.excitatory))
    logger.info('%d tuple(s) written to %s', len(op.excitatory), path)
    return EXIT_OK


def _inputs(args, config):
    """
    ``[(id, path)]`` of the images to process, and the loader turning one path into a gray image
    """
    channel = args.channel or (config.dataset.channel if config.dataset else 'luminance')
    invert = args.invert or bool(config.dataset and config.dataset.invert)
    if args.inputs:
        pairs = sorted((as_path(p).stem, as_path(p)) for p in args.inputs)
        ids = [k for k, _ in pairs]
        if len(set(ids)) != len(ids):
            raise ParameterError('input images must have distinct file names (ids)')
    elif config.dataset is not None:
        stream = DatasetStream(config.dataset.root, config.dataset.layout, channel, invert, config.dataset.split)
        pairs = stream.index()
        for e in stream.errors:
            logger.warning('skipping %s', e)
    else:
        raise ConfigurationError('no input: give image paths or a dataset section in the config')

    def read(path):
        image = load_image(path, channel)
        return 1.0 - image if invert else image

    return pairs, read, {'channel': channel, 'invert': invert}


def cmd_apply(args):
    """
    apply the operator of ``--filter`` to every input and write ``<id>.png`` (response scaled to its maximum),
    ``<id>.npy`` (normalized response), ``<id>_raw.npy`` with ``--raw`` and ``<id>_mask.png`` with
    ``--threshold``, plus the ``run.json`` sidecar.
    """
    config = _config(args)
    if not args.filter:
        raise ConfigurationError('--filter is required')
    if args.threshold is not None and not 0 < args.threshold <= 1:
        raise ParameterError('--threshold must lie in (0, 1], got %r' % args.threshold)
    op = RusticoOperator.load(args.filter)
    out = _output_dir(args, config)
    pairs, read, preprocessing = _inputs(args, config)
    inhibition = not args.no_inhibition
    jobs = args.jobs or default_jobs()

    def one(pair):
        item_id, path = pair
        try:
            image = read(path)
            raw = operator_response(op, image, inhibition)
        except (DatasetError, ParameterError) as e:
            # unreadable, or too small for the operator's support
            return ItemError(item_id, str(e))
        normalized = normalize_by_max(raw)
        save_response_png(raw, join_path(str(out), item_id + '.png'))
        np.save(join_path(str(out), item_id + '.npy'), normalized)
        if args.raw:
            np.save(join_path(str(out), item_id + RAW_SUFFIX + '.npy'), raw)
        if args.threshold is not None:
            save_mask_png(threshold_map(normalized, args.threshold), join_path(str(out), item_id + MASK_SUFFIX + '.png'))
        return sha256_file(path)

    start = time.time()
    results = ordered_map(one, pairs, jobs=jobs, desc='apply', progress=_progress())
    logger.info('%d image(s) in %.1fs', len(pairs), time.time() - start)

    failures = [r for r in results if isinstance(r, ItemError)]
    inputs = {k: r for (k, _), r in zip(pairs, results) if not isinstance(r, ItemError)}
    dump_json({
        'command': 'apply',
        'version': _version(),
        'config': config.to_dict(),
        'operator': op.to_dict(),
        'filter_sha256': sha256_file(args.filter),
        'inhibition': inhibition,
        'threshold': args.threshold,
        'preprocessing': preprocessing,
        'inputs': inputs,
        'errors': [str(e) for e in failures],
    }, join_path(str(out), RUN_JSON))

    for e in failures:
        logger.error('failed %s', e)
    if failures:
        logger.error('%d of %d image(s) failed', len(failures), len(pairs))
        return EXIT_IO
    if not pairs:
        raise DatasetError('no input image')
    return EXIT_OK


def _response_files(directory):
    directory = as_path(directory)
    if not directory.is_dir():
        raise DatasetError('response directory %s does not exist' % directory)
    npy = {p.stem: p for p in directory.glob('*.npy') if not p.stem.endswith(RAW_SUFFIX)}
    if npy:
        return npy
    return {p.stem: p for p in directory.glob('*.png') if not p.stem.endswith(MASK_SUFFIX)}


def _load_response(path):
    if path.suffix == '.npy':
        return np.load(str(path))
    return load_image(path)


def cmd_eval(args):
    """
    sweep the threshold grid over the responses of ``--responses`` against the ground truth of the config's
    dataset; write ``report.csv``, ``summary.json`` and ``sweep.csv``.
    """
    config = _config(args)
    if config.dataset is None:
        raise ConfigurationError('eval needs a dataset section in the config')
    if not args.responses:
        raise ConfigurationError('--responses is required')
    ev = config.evaluation
    out = _output_dir(args, config)
    d = config.dataset
    items = list(DatasetStream(d.root, d.layout, d.channel, d.invert, d.split))
    files = _response_files(args.responses)
    ids = [item.id for item in items]
    missing = sorted(set(ids) - set(files))
    extra = sorted(set(files) - set(ids))
    if missing or extra:
        raise EvaluationError('responses and ground truth do not match: no response for [%s], no ground truth for [%s]'
                              % (', '.join(missing), ', '.join(extra)))
    responses = [_load_response(files[k]) for k in ids]
    grid = threshold_grid(ev.threshold_grid)
    jobs = args.jobs or default_jobs()

    if ev.metric_set == CENTERLINE:
        gts = []
        for item in items:
            if item.gt_centerline is not None:
                gts.append(item.gt_centerline)
            elif item.gt_segmentation is not None:
                gts.append(skeletonize(item.gt_segmentation))
            else:
                raise EvaluationError('%s has no ground truth' % item.id)
        result = sweep_thresholds(responses, gts, ev.d_star, ev.distance, grid, jobs, _progress())
        rows = dict(zip(ids, result.at_t_star()))
    else:
        if any(item.gt_segmentation is None for item in items):
            raise EvaluationError('segmentation metrics need gt_segmentation for every item')
        gts = [item.gt_segmentation for item in items]
        fovs = [item.fov for item in items]
        result = sweep_segmentation(responses, gts, fovs, grid, jobs, _progress())
        rows = {}
        for k, r, g, row in zip(ids, responses, gts, result.at_t_star()):
            row.update(cal(threshold_map(r, result.t_star), g)._asdict())
            rows[k] = row

    report = EvalReport(d.layout, ev.metric_set, config.to_dict(), result.t_star, rows)
    if args.baseline:
        report.compare(read_report_csv(args.baseline))
    report.write(out)
    write_sweep_csv(result, join_path(str(out), SWEEP_CSV))
    for name, value in sorted(report.averages.items()):
        logger.info('%s = %.4f at t* = %.2f', name, value, report.t_star)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog='rustico', formatter_class=argparse.ArgumentDefaultsHelpFormatter,
                                     description='delineation of curvilinear structures with push-pull inhibited '
                                                 'COSFIRE filters')
    parser.add_argument('-v', '--verbose', action='count', default=0, help='debug output')
    parser.add_argument('-q', '--quiet', action='count', default=0, help='warnings and errors only')
    sub = parser.add_subparsers(dest='command')

    p = sub.add_parser('configure', help='configure the filter of a run config on its bar prototype')
    p.add_argument('--config', help='run config JSON')
    p.add_argument('--filter', help='where to write the filter (default: <out>/filter.json)')
    p.add_argument('--out', help='output directory (default: the config output)')
    p.set_defaults(handler=cmd_configure)

    p = sub.add_parser('apply', help='compute response maps')
    p.add_argument('inputs', nargs='*', help='images (default: the dataset of the config)')
    p.add_argument('--config', help='run config JSON')
    p.add_argument('--filter', help='filter JSON written by configure')
    p.add_argument('--out', help='output directory (default: the config output)')
    p.add_argument('--threshold', type=float, help='also write binary masks at this threshold')
    p.add_argument('--jobs', type=int, help='worker threads (default: $RUSTICO_JOBS or 1)')
    p.add_argument('--no-inhibition', action='store_true', help='plain COSFIRE baseline (xi = 0)')
    p.add_argument('--raw', action='store_true', help='also write the un-normalized response')
    p.add_argument('--channel', choices=('green', 'luminance'), help='channel of color images')
    p.add_argument('--invert', action='store_true', help='invert intensities (dark structures on bright ground)')
    p.set_defaults(handler=cmd_apply)

    p = sub.add_parser('eval', help='evaluate response maps against the dataset ground truth')
    p.add_argument('--config', help='run config JSON')
    p.add_argument('--responses', help='directory written by apply')
    p.add_argument('--out', help='output directory (default: the config output)')
    p.add_argument('--baseline', help='report.csv of another run for the paired test')
    p.add_argument('--jobs', type=int, help='worker threads (default: $RUSTICO_JOBS or 1)')
    p.set_defaults(handler=cmd_eval)
    return parser


def main(argv=None):
    """
    usage: rustico [-h] [-v] [-q] {configure,apply,eval} ...

    exit codes: 0 success, 2 configuration or parameter error, 3 I/O error (including per-image failures),
    4 evaluation error.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose - args.quiet)
    if not getattr(args, 'handler', None):
        parser.print_help(sys.stderr)
        return EXIT_CONFIG
    if getattr(args, 'jobs', None) is not None and args.jobs < 1:
        logger.error('--jobs must be >= 1')
        return EXIT_CONFIG
    try:
        return args.handler(args)
    except (ConfigurationError, ParameterError) as e:
        logger.error('%s', e)
        return EXIT_CONFIG
    except EvaluationError as e:
        logger.error('%s', e)
        return EXIT_EVAL
    except (DatasetError, IOError, OSError) as e:
        logger.error('%s', e)
        return EXIT_IO
    except RusticoError as e:
        logger.error('%s', e)
        return 1
