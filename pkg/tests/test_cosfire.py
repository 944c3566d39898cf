import math

import numpy as np
import pytest

from rustico.common.errors import ConfigurationError, ParameterError
from rustico.filters.cosfire import (CosfireFilter, Tuple4, circular_peaks, configure, cosfire_response,
                                     feature_maps, geometric_mean, render_bar_prototype, rotate_filter, wrap_angle)
from rustico.filters.dog import DoGSpec


def test_bar_prototype():
    img = render_bar_prototype(21, 3, 51)
    assert img.shape == (51, 51)
    assert int(img.sum()) == 63
    assert img[25, 25] == 1.0
    assert np.array_equal(np.rot90(img, 2), img)
    assert np.all(img[24:27, 15:36] == 1.0)


@pytest.mark.parametrize('length, width, canvas', [(21, 3, 50), (3, 3, 51), (61, 3, 51)])
def test_bar_prototype_rejects(length, width, canvas):
    with pytest.raises(ParameterError):
        render_bar_prototype(length, width, canvas)


def test_tuple_canonical_form():
    t = Tuple4(1, 2.0, 3.0, -0.5)
    assert 0 <= t.phi < 2 * math.pi
    assert abs(t.phi - (2 * math.pi - 0.5)) < 1e-8
    assert Tuple4(1, 2.0, 3.0, 2 * math.pi).phi == 0.0
    assert Tuple4(1, 1.0 / 3.0, 0, 0).sigma == 0.333333333


@pytest.mark.parametrize('args', [(1, 0.0, 1.0, 0.0), (1, 1.0, -1.0, 0.0), (0, 1.0, 1.0, 0.0)])
def test_tuple_validation(args):
    with pytest.raises(ParameterError):
        Tuple4(*args)


def test_wrap_angle():
    assert wrap_angle(0.0) == 0.0
    assert abs(wrap_angle(3 * math.pi) - math.pi) < 1e-8
    assert abs(wrap_angle(-math.pi / 2) - 1.5 * math.pi) < 1e-8
    # residues of cancelled rotations come back to exactly 0
    for residue in (4.87e-10, -3e-11, 2 * math.pi - 1e-12):
        phi = wrap_angle(residue)
        assert phi == 0.0 and math.copysign(1.0, phi) == 1.0


def test_filter_validation():
    with pytest.raises(ParameterError):
        CosfireFilter((), 1.0, 0.1)
    with pytest.raises(ParameterError):
        CosfireFilter((Tuple4(1, 1.0, 0.0, 0.0),), 0.0, 0.1)
    with pytest.raises(ParameterError):
        CosfireFilter((Tuple4(1, 1.0, 2.0, 0.0),), -1.0, 0.1)


def test_filter_tuples_are_sorted():
    f = CosfireFilter((Tuple4(1, 1.0, 4.0, 0.0), Tuple4(1, 1.0, 0.0, 0.0), Tuple4(1, 1.0, 2.0, math.pi),
                       Tuple4(1, 1.0, 2.0, 0.0)), 1.0, 0.1)
    assert [(t.rho, t.phi) for t in f] == [(0.0, 0.0), (2.0, 0.0), (2.0, wrap_angle(math.pi)), (4.0, 0.0)]


def test_filter_serialization(tmp_path, three_tuple_filter):
    a, b = tmp_path / 'a.json', tmp_path / 'b.json'
    three_tuple_filter.save(a)
    loaded = CosfireFilter.load(a)
    assert loaded == three_tuple_filter
    loaded.save(b)
    assert a.read_bytes() == b.read_bytes()
    assert set(three_tuple_filter.to_dict()) == {'sigma0', 'alpha', 'tuples'}
    assert set(three_tuple_filter.to_dict()['tuples'][0]) == {'delta', 'sigma', 'rho', 'phi'}


def test_malformed_filter_document():
    with pytest.raises(ConfigurationError):
        CosfireFilter.from_dict({'sigma0': 1.0, 'tuples': []})
    with pytest.raises(ConfigurationError):
        CosfireFilter.from_dict({'sigma0': 1.0, 'alpha': 0.1, 'tuples': [{'delta': 1}]})


def test_circular_peaks_merges_close_maxima():
    values = np.zeros(360)
    values[10], values[14], values[200] = 1.0, 0.9, 0.8
    assert circular_peaks(values, 0.5, 22.5) == [10, 200]
    assert circular_peaks(values, 0.85, 22.5) == [10]


def test_circular_peaks_wraps_around():
    values = np.zeros(360)
    values[359], values[2] = 1.0, 0.95
    assert circular_peaks(values, 0.5, 22.5) == [359]


def test_configure_on_a_bar(tb_params):
    p = tb_params
    prototype = render_bar_prototype(p.prototype_length, p.prototype_width, p.canvas)
    f = configure(prototype, DoGSpec(1, p.sigma), p.radii(), sigma0=p.sigma0, alpha=p.alpha)
    assert sorted({t.rho for t in f}) == [float(r) for r in range(0, 17, 2)]
    assert len(f) == 1 + 2 * 8
    for t in f:
        assert t.delta == 1 and t.sigma == 2.5
        if t.rho > 0:
            assert t.phi < 1e-9 or abs(t.phi - math.pi) < 1e-6
    assert f.sigma0 == 3.0 and f.alpha == 0.1


def _angle_gap(a, b):
    return abs(math.remainder(a - b, 2 * math.pi))


def test_configure_on_a_rotated_bar(tb_params):
    p = tb_params
    prototype = render_bar_prototype(p.prototype_length, p.prototype_width, p.canvas)
    spec = DoGSpec(1, p.sigma)
    f = configure(prototype, spec, p.radii(), sigma0=p.sigma0, alpha=p.alpha)
    turned = configure(np.rot90(prototype), spec, p.radii(), sigma0=p.sigma0, alpha=p.alpha)
    assert len(turned) == len(f)
    assert sorted((t.delta, t.sigma, t.rho) for t in turned) == sorted((t.delta, t.sigma, t.rho) for t in f)
    tolerance = math.radians(2)
    for t in turned:
        if t.rho > 0:
            assert min(_angle_gap(t.phi, math.pi / 2), _angle_gap(t.phi, 1.5 * math.pi)) <= tolerance
    expected = rotate_filter(f, math.pi / 2)
    for t, u in zip(expected, turned):
        assert t.rho == u.rho and _angle_gap(t.phi, u.phi) <= tolerance


def test_response_needs_both_sides_of_the_bar(tb_params, tb_operator):
    p = tb_params
    f = tb_operator.excitatory
    prototype = render_bar_prototype(p.prototype_length, p.prototype_width, p.canvas)
    c = p.canvas // 2
    assert cosfire_response(f, prototype)[c, c] > 0
    half = prototype.copy()
    half[:, c + 1:] = 0.0
    assert cosfire_response(f, half)[c, c] == 0.0


def test_response_lies_between_feature_maps(tb_operator, rng):
    f = tb_operator.excitatory
    img = rng.rand(48, 48)
    stack = np.stack(feature_maps(f, img))
    out = cosfire_response(f, img)
    assert np.all(out >= stack.min(axis=0) * (1 - 1e-12))
    assert np.all(out <= stack.max(axis=0) * (1 + 1e-12))


def test_configure_rejects_even_prototype():
    with pytest.raises(ParameterError):
        configure(np.zeros((10, 11)), DoGSpec(1, 1.0), [0, 2])


def test_configure_without_keypoints():
    with pytest.raises(ConfigurationError):
        configure(np.zeros((21, 21)), DoGSpec(1, 1.0), [0, 2])
    prototype = render_bar_prototype(5, 1, 61)
    with pytest.raises(ConfigurationError) as e:
        configure(prototype, DoGSpec(1, 1.0), [20, 25])
    assert 'rho=20' in str(e.value)


def test_configure_is_deterministic(tmp_path, tb_params):
    p = tb_params
    prototype = render_bar_prototype(p.prototype_length, p.prototype_width, p.canvas)
    a = configure(prototype, DoGSpec(1, p.sigma), p.radii())
    b = configure(prototype, DoGSpec(1, p.sigma), p.radii())
    a.save(tmp_path / 'a.json')
    b.save(tmp_path / 'b.json')
    assert (tmp_path / 'a.json').read_bytes() == (tmp_path / 'b.json').read_bytes()


def test_rotate_filter(three_tuple_filter):
    r = rotate_filter(three_tuple_filter, math.pi / 2)
    assert len(r) == len(three_tuple_filter)
    phis = sorted(t.phi for t in r if t.rho > 0)
    assert abs(phis[0] - math.pi / 2) < 1e-8 and abs(phis[1] - 1.5 * math.pi) < 1e-8
    assert r.sigma0 == three_tuple_filter.sigma0 and r.alpha == three_tuple_filter.alpha
    assert rotate_filter(three_tuple_filter, 0.0) == three_tuple_filter
    assert rotate_filter(three_tuple_filter, 2 * math.pi) == three_tuple_filter


@pytest.mark.parametrize('psi', [math.pi / 7, 0.3, 2.5, -1.1])
def test_cancelled_rotations_keep_zero_angles(three_tuple_filter, psi):
    back = rotate_filter(rotate_filter(three_tuple_filter, psi), -psi)
    assert len(back) == len(three_tuple_filter)
    for t, u in zip(three_tuple_filter, back):
        assert (t.delta, t.sigma, t.rho) == (u.delta, u.sigma, u.rho)
        assert abs(math.remainder(u.phi - t.phi, 2 * math.pi)) < 2e-9
        if t.phi == 0.0:
            assert u.phi == 0.0


def test_geometric_mean():
    a = np.array([[1.0, 4.0, 0.0]])
    b = np.array([[4.0, 1.0, 3.0]])
    out = geometric_mean([a, b])
    assert np.allclose(out, [[2.0, 2.0, 0.0]])
    assert out[0, 2] == 0.0
    single = geometric_mean([a])
    assert np.array_equal(single, a) and single is not a


def test_geometric_mean_of_many_small_values():
    maps = [np.full((2, 2), 1e-30) for _ in range(40)]
    assert np.allclose(geometric_mean(maps), 1e-30, rtol=1e-9)


def test_response_is_nonnegative_and_hard_zero(three_tuple_filter, rng):
    img = rng.rand(20, 20)
    out = cosfire_response(three_tuple_filter, img)
    assert np.all(out >= 0) and np.all(np.isfinite(out))
    maps = feature_maps(three_tuple_filter, img)
    dead = np.any([m == 0 for m in maps], axis=0)
    assert np.all(out[dead] == 0)


def test_response_on_zero_image(three_tuple_filter):
    assert np.all(cosfire_response(three_tuple_filter, np.zeros((15, 15))) == 0)


def test_rotation_covariance(tb_operator):
    from rustico.common.datasets import make_fixture
    f = tb_operator.excitatory
    for psi in (0.0, math.pi / 4, math.pi / 2):
        img = make_fixture('bar', {'size': 61, 'length': 33, 'width': 1, 'angle': psi}).image
        out = cosfire_response(rotate_filter(f, psi), img)
        r, c = np.unravel_index(np.argmax(out), out.shape)
        assert max(abs(r - 30), abs(c - 30)) <= 2
