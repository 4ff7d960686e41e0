import numpy as np
import pytest

from galilean_elastica.galilean import (GalileanIsometry, apply_isometry, det3, gcross, gdot,
                                        gnorm, is_isotropic)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def test_norm_of_non_isotropic_vector_is_abs_x():
    assert gnorm([-3.0, 4.0, 12.0]) == 3.0


def test_norm_of_isotropic_vector_is_euclidean_yz():
    assert gnorm([0.0, 3.0, 4.0]) == 5.0


def test_scalar_product_switches_on_isotropy():
    assert gdot([2.0, 1.0, 1.0], [3.0, 5.0, 7.0]) == 6.0
    assert gdot([0.0, 1.0, 2.0], [0.0, 3.0, 4.0]) == 11.0
    # a single non-isotropic factor still uses the x components
    assert gdot([0.0, 1.0, 2.0], [1.0, 3.0, 4.0]) == 0.0


def test_cross_product_is_isotropic_and_antisymmetric(rng):
    a, b = rng.normal(size=(2, 10, 3))
    c = gcross(a, b)
    assert np.all(is_isotropic(c))
    np.testing.assert_allclose(c, -gcross(b, a))


def test_cross_product_of_isotropic_pair_vanishes():
    np.testing.assert_allclose(gcross([0.0, 1.0, 2.0], [0.0, -3.0, 0.5]), 0.0)


def test_negative_isotropy_tolerance_rejected():
    with pytest.raises(ValueError):
        is_isotropic([0.0, 1.0, 0.0], tol=-1.0)


def test_shape_check():
    with pytest.raises(ValueError):
        gnorm([1.0, 2.0])


def test_isometries_preserve_norms_products_and_volume(rng):
    for _ in range(20):
        m = GalileanIsometry.random(rng)
        a, b, c = rng.normal(size=(3, 3))
        iso_a, iso_b = a * [0, 1, 1], b * [0, 1, 1]
        np.testing.assert_allclose(gnorm(m.linear(a)), gnorm(a))
        np.testing.assert_allclose(gnorm(m.linear(iso_a)), gnorm(iso_a))
        np.testing.assert_allclose(gdot(m.linear(iso_a), m.linear(iso_b)), gdot(iso_a, iso_b))
        np.testing.assert_allclose(det3(m.linear(a), m.linear(b), m.linear(c)), det3(a, b, c),
                                   atol=1e-12)


def test_isometry_translation_part():
    m = GalileanIsometry(a=1.0, b=2.0, d=3.0)
    np.testing.assert_allclose(apply_isometry(m, [0.0, 0.0, 0.0]), [1.0, 2.0, 3.0])
    np.testing.assert_allclose(m([1.0, 1.0, 1.0]), [2.0, 3.0, 4.0])
