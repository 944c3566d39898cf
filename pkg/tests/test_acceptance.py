import filecmp
import math
import time

import numpy as np

from rustico.commands import EXIT_OK, main
from rustico.common.datasets import make_fixture
from rustico.config import EvaluationParams
from rustico.evaluation.metrics import cal, centerline_prf, mcc, threshold_grid
from rustico.filters.cosfire import cosfire_response, render_bar_prototype, rotate_filter
from rustico.filters.dog import DoGResponseBank
from rustico.filters.push_pull import RusticoOperator, multi_orientation_response

from .test_commands import tb_corpus, write_config


def test_xi_zero_reduces_to_cosfire(tb_operator):
    op = tb_operator.without_inhibition()
    r = np.random.RandomState(1)
    start = time.time()
    for _ in range(50):
        img = r.rand(64, 64)
        rustico = multi_orientation_response(op, img)
        cosfire = np.maximum.reduce([cosfire_response(rotate_filter(op.excitatory, psi), img)
                                     for psi in op.orientations])
        assert np.array_equal(rustico, cosfire)
    assert time.time() - start < 30


def _naive_correlate(img, weights):
    r = weights.shape[0] // 2
    padded = np.pad(img, r, mode='edge')
    out = np.zeros_like(img)
    for y in range(img.shape[0]):
        for x in range(img.shape[1]):
            out[y, x] = np.sum(weights * padded[y:y + 2 * r + 1, x:x + 2 * r + 1])
    return out


def _sampled_gaussian(sigma, radius):
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-(x[:, None] ** 2 + x[None, :] ** 2) / (2.0 * sigma ** 2))
    return g / g.sum()


def _naive_response(f, img):
    h, w = img.shape
    maps = []
    for t in f.tuples:
        radius = int(math.ceil(3 * t.sigma))
        dog = _sampled_gaussian(t.sigma / 2.0, radius) - _sampled_gaussian(t.sigma, radius)
        dog = np.maximum(_naive_correlate(img, t.delta * dog), 0.0)
        blur_sigma = f.sigma0 + f.alpha * t.rho
        blurred = _naive_correlate(dog, _sampled_gaussian(blur_sigma, int(math.ceil(3 * blur_sigma))))
        # the value collected at (x, y) sits at x + rho cos(phi), y - rho sin(phi)
        d_col = int(np.rint(t.rho * math.cos(t.phi)))
        d_row = -int(np.rint(t.rho * math.sin(t.phi)))
        shifted = np.zeros_like(img)
        for y in range(h):
            for x in range(w):
                if 0 <= y + d_row < h and 0 <= x + d_col < w:
                    shifted[y, x] = blurred[y + d_row, x + d_col]
        maps.append(shifted)
    product = np.prod(maps, axis=0)
    return product ** (1.0 / len(maps))


def test_response_matches_the_per_pixel_reference(three_tuple_filter):
    r = np.random.RandomState(2)
    for _ in range(20):
        img = r.rand(15, 15)
        fast = cosfire_response(three_tuple_filter, img)
        assert np.max(np.abs(fast - _naive_response(three_tuple_filter, img))) < 1e-6


def test_self_detection(tb_params, tb_operator):
    f = tb_operator.excitatory
    canvas = tb_params.canvas
    center = canvas // 2
    prototype = render_bar_prototype(tb_params.prototype_length, tb_params.prototype_width, canvas)
    out = cosfire_response(f, prototype)
    r, c = np.unravel_index(np.argmax(out), out.shape)
    assert max(abs(r - center), abs(c - center)) <= 1
    for psi in (0.0, math.pi / 6, math.pi / 4, math.pi / 2):
        bar = make_fixture('bar', {'size': canvas, 'length': tb_params.prototype_length, 'width': 1,
                                   'angle': psi}).image
        out = cosfire_response(rotate_filter(f, psi), bar)
        r, c = np.unravel_index(np.argmax(out), out.shape)
        assert max(abs(r - center), abs(c - center)) <= 2


def _peak_ratio(response, regions):
    texture = response[regions['texture']].max()
    bar = response[regions['bar']].max()
    return math.inf if texture == 0 else bar / texture


def test_texture_suppression(tb_operator):
    fx = make_fixture('bar_plus_texture')
    bank = DoGResponseBank(fx.image)
    ratios = []
    for xi in (0.0, 0.5, 1.0, 1.5, 2.0):
        op = RusticoOperator(tb_operator.excitatory, 0.5, xi, tb_operator.orientations)
        response = multi_orientation_response(op, fx.image, bank)
        assert response[fx.regions['bar']].max() > 0
        ratios.append(_peak_ratio(response, fx.regions))
    assert ratios[3] > ratios[0]
    assert all(b >= a for a, b in zip(ratios, ratios[1:]))


def test_metric_oracles():
    pred = np.zeros(100, dtype=bool)
    gt = np.zeros(100, dtype=bool)
    pred[:60], gt[:50], gt[60:70] = True, True, True
    assert abs(mcc(pred.reshape(10, 10), gt.reshape(10, 10)) - 0.583333) < 1e-6
    assert abs(mcc(pred.reshape(10, 10), gt.reshape(10, 10)) - 7.0 / 12.0) < 1e-9

    line, offset = np.zeros((30, 30), dtype=bool), np.zeros((30, 30), dtype=bool)
    line[:, 10], offset[:, 12] = True, True
    assert centerline_prf(offset, line, 3).f == 1.0
    assert centerline_prf(offset, line, 1).f == 0.0

    curve = make_fixture('curve').centerline
    assert abs(cal(curve, curve).cal - 1.0) < 1e-9

    r = np.random.RandomState(3)
    for _ in range(100):
        a = r.rand(24, 24) < r.uniform(0.0, 0.4)
        b = r.rand(24, 24) < r.uniform(0.02, 0.4)
        b[12, 12] = True
        score = cal(a, b)
        assert all(0.0 <= v <= 1.0 for v in score)


def _full_run(tmp_path, config, name):
    out = tmp_path / name
    assert main(['-q', 'configure', '--config', config, '--out', str(out)]) == EXIT_OK
    assert main(['-q', 'apply', '--config', config, '--filter', str(out / 'filter.json'), '--out', str(out / 'maps'),
                 '--threshold', '0.5']) == EXIT_OK
    assert main(['-q', 'eval', '--config', config, '--responses', str(out / 'maps'), '--out', str(out)]) == EXIT_OK
    return out


def _same_tree(a, b):
    cmp = filecmp.dircmp(str(a), str(b))
    assert not cmp.left_only and not cmp.right_only
    _, mismatch, errors = filecmp.cmpfiles(str(a), str(b), cmp.common_files, shallow=False)
    assert not mismatch and not errors
    for sub in cmp.common_dirs:
        _same_tree(a / sub, b / sub)


def test_full_runs_are_byte_identical(tmp_path):
    tb_corpus(tmp_path / 'data')
    config = write_config(tmp_path / 'c.json', root=tmp_path / 'data')
    first = _full_run(tmp_path, config, 'first')
    second = _full_run(tmp_path, config, 'second')
    for name in ('filter.json', 'report.csv', 'summary.json', 'sweep.csv', 'maps/run.json', 'maps/rose00.npy'):
        assert (first / name).is_file()
    _same_tree(first, second)


def test_threshold_grid_protocol():
    grid = threshold_grid(EvaluationParams().threshold_grid)
    assert ['%.2f' % t for t in grid] == ['%d.%02d' % divmod(k, 100) for k in range(1, 101)]
    assert grid.tolist() == [k / 100.0 for k in range(1, 101)]
