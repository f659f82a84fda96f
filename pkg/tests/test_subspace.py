import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spaceforms import geometry as geo
from spaceforms import subspace as ss
from spaceforms.geometry import SpaceForm
from spaceforms.subspace import AffineSubspace

import oracles

S2 = SpaceForm.sphere(2)
H2 = SpaceForm.hyperboloid(2)

# oracle values computed with mpmath from closed forms for the coordinate subspaces
# sphere: distance from (0.6, 0, 0.8) to the great circle z = 0 is asin(0.8)
ASIN_08 = 0.927295218001612232428512462922
# radius sqrt(2) sphere, same point scaled
ASIN_08_C05 = 1.31139347362159581157938262077
# hyperboloid: distance from (sqrt(1.73), 0.3, 0.8) to {(cosh t, sinh t, 0)} is acosh(sqrt(1.64))
ACOSH_164 = 0.732668256045410864154917816041


def e(i, n=3):
    v = np.zeros(n)
    v[i] = 1.0
    return v


def coord_sub(space, k):
    n = space.dim + 1
    return AffineSubspace(space, space.origin(), np.eye(n)[:, 1:k + 1] * space.scale)


def random_sub(space, k, seed):
    rng = np.random.default_rng(seed)
    p, h = oracles.random_subspace(space, k, rng)
    return AffineSubspace(space, p, h), rng


class TestConstruction:
    def test_from_vectors_orthonormalizes(self):
        for space in oracles.spaces():
            rng = np.random.default_rng(0)
            p = oracles.random_points(space, 1, rng)[0]
            sub = AffineSubspace.from_vectors(space, p, rng.standard_normal((space.dim + 1, 3)))
            sub.check(1e-10)
            assert sub.dim == 3

    def test_dependent_vectors_rejected(self):
        v = np.array([[0, 0], [1, 2], [0, 0]], dtype=float)
        with pytest.raises(ValueError):
            AffineSubspace.from_vectors(S2, e(0), v)

    def test_check_catches_bad_basis(self):
        with pytest.raises(ValueError):
            AffineSubspace(S2, e(0), e(0)[:, None]).check()
        with pytest.raises(ValueError):
            AffineSubspace(S2, e(0), 2 * e(1)[:, None]).check()

    def test_immutable(self):
        sub = coord_sub(S2, 1)
        with pytest.raises(ValueError):
            sub.base[0] = 2.0

    def test_too_many_directions(self):
        with pytest.raises(ValueError):
            AffineSubspace(S2, e(0), np.ones((3, 3)))

    def test_k_zero(self):
        sub = AffineSubspace.from_vectors(H2, e(0))
        assert sub.dim == 0
        x = np.array([np.cosh(1.5), 0, np.sinh(1.5)])
        assert ss.projection_distance(sub, x) == pytest.approx(1.5)
        np.testing.assert_allclose(ss.project(sub, x), e(0))


class TestProject:
    def test_fixes_points_on_subspace(self):
        for space in oracles.spaces():
            sub, rng = random_sub(space, 2, 1)
            y = geo.exp_map(space, sub.base, rng.standard_normal((20, 2)) @ sub.basis.T / space.scale)
            np.testing.assert_allclose(ss.project(sub, y), y, atol=1e-9 * np.max(np.abs(y)))
            np.testing.assert_allclose(ss.projection_distance(sub, y), 0, atol=1e-7)

    def test_non_unique(self):
        sub = AffineSubspace(S2, e(1), e(2)[:, None])
        with pytest.raises(ss.NonUniqueProjection):
            ss.project(sub, e(0))
        np.testing.assert_array_equal(ss.project_or_base(sub, e(0)), e(1))
        assert ss.projection_distance(sub, e(0)) == pytest.approx(np.pi / 2)

    def test_non_unique_scaled(self):
        sp = SpaceForm.sphere(2, 0.5)
        sub = coord_sub(sp, 1)
        assert ss.projection_distance(sub, np.sqrt(2) * e(2)) == pytest.approx(np.pi / 2 * np.sqrt(2))

    def test_frozen_values(self):
        x = np.array([0.6, 0.0, 0.8])
        assert ss.projection_distance(coord_sub(S2, 1), x) == pytest.approx(ASIN_08, abs=1e-14)
        sp = SpaceForm.sphere(2, 0.5)
        assert ss.projection_distance(coord_sub(sp, 1), np.sqrt(2) * x) == pytest.approx(ASIN_08_C05, abs=1e-14)
        y = np.array([np.sqrt(1.73), 0.3, 0.8])
        assert ss.projection_distance(coord_sub(H2, 1), y) == pytest.approx(ACOSH_164, abs=1e-14)
        # the nearest point sits at t with tanh t = x1 / x0
        t = np.arctanh(0.3 / np.sqrt(1.73))
        np.testing.assert_allclose(ss.project(coord_sub(H2, 1), y), [np.cosh(t), np.sinh(t), 0], atol=1e-14)

    @pytest.mark.parametrize("space", oracles.spaces(), ids=str)
    def test_distance_matches_projection(self, space):
        sub, rng = random_sub(space, 2, 2)
        x = oracles.random_points(space, 100, rng, spread=0.8)
        d = ss.projection_distance(sub, x)
        np.testing.assert_allclose(d, geo.distance(space, x, ss.project(sub, x)), rtol=1e-8, atol=1e-10)

    @pytest.mark.parametrize("space", oracles.spaces(), ids=str)
    def test_matches_complement_formula(self, space):
        sub, rng = random_sub(space, 2, 3)
        comp = ss.complement_basis(sub)
        assert comp.shape[1] == space.dim - 2
        x = oracles.random_points(space, 50, rng, spread=0.8)
        energy = np.sum(((x * space.signature) @ comp) ** 2, axis=1)
        s = space.scale
        if space.spherical:
            # the nearest point is never beyond pi/2, so asin picks the right branch
            ref = np.arcsin(np.sqrt(np.minimum(energy, 1.0))) / s
        else:
            ref = np.arcsinh(np.sqrt(energy)) / s
        np.testing.assert_allclose(ss.projection_distance(sub, x), ref, rtol=1e-7, atol=1e-9)
        np.testing.assert_allclose(ss.residual_energy(sub, x), energy, rtol=1e-8, atol=1e-10)

    @pytest.mark.parametrize("space", oracles.spaces(), ids=str)
    def test_matches_brute_force(self, space):
        sub, rng = random_sub(space, 1, 4)
        x = oracles.random_points(space, 15, rng, spread=0.8)
        for xi in x:
            ref = oracles.brute_projection_distance(space, sub.base, sub.basis, xi, rng)
            assert ss.projection_distance(sub, xi) == pytest.approx(ref, abs=1e-5)

    def test_monotone_in_k(self):
        for space in oracles.spaces():
            sub, rng = random_sub(space, 4, 5)
            x = oracles.random_points(space, 40, rng)
            d = np.array([ss.projection_distance(sub.with_dim(k), x) for k in range(5)])
            assert np.all(np.diff(d, axis=0) <= 1e-12)


class TestResidualEnergy:
    def test_examples(self):
        sub = coord_sub(S2, 1)
        assert ss.residual_energy(sub, e(1)) == 0.0
        assert ss.residual_energy(sub, e(2)) == pytest.approx(1.0)

    @pytest.mark.parametrize("space", oracles.spaces(), ids=str)
    def test_sin_sinh_identity(self, space):
        sub, rng = random_sub(space, 2, 6)
        x = oracles.random_points(space, 100, rng)
        t = space.scale * ss.projection_distance(sub, x)
        f = np.sin(t) ** 2 if space.spherical else np.sinh(t) ** 2
        np.testing.assert_allclose(ss.residual_energy(sub, x), f, rtol=1e-9, atol=1e-12)


class TestLowDim:
    def test_base_maps_to_pole(self):
        for space in oracles.spaces():
            sub, _ = random_sub(space, 2, 7)
            pole = space.with_dim(2).origin()
            np.testing.assert_allclose(ss.to_low_dim(sub, sub.base), pole, atol=1e-12)
            np.testing.assert_allclose(ss.from_low_dim(sub, pole), sub.base, atol=1e-12)

    def test_hyperbolic_example(self):
        t = 0.9
        sub = coord_sub(H2, 1)
        x = np.array([np.cosh(t), np.sinh(t), 0.0])
        np.testing.assert_allclose(ss.to_low_dim(sub, x), [np.cosh(t), np.sinh(t)], rtol=1e-14)
        np.testing.assert_allclose(ss.from_low_dim(sub, [np.cosh(t), np.sinh(t)]), x, rtol=1e-14)

    @pytest.mark.parametrize("space", oracles.spaces(), ids=str)
    def test_isometry_and_round_trip(self, space):
        sub, rng = random_sub(space, 3, 8)
        c = rng.standard_normal((30, 3)) * 0.8
        y = geo.exp_map(space, sub.base, c @ sub.basis.T / space.scale)
        low = ss.to_low_dim(sub, y)
        geo.check_points(space.with_dim(3), low, 1e-10)
        d_high = geo.distance(space, y[:15], y[15:])
        d_low = geo.distance(space.with_dim(3), low[:15], low[15:])
        np.testing.assert_allclose(d_low, d_high, rtol=1e-8, atol=1e-10)
        np.testing.assert_allclose(ss.from_low_dim(sub, low), y, atol=1e-9 * np.max(np.abs(y)))

    def test_off_subspace(self):
        sub = coord_sub(S2, 1)
        x = geo.normalize(S2, np.array([1.0, 0.2, 0.3]))
        with pytest.raises(ss.PointNotOnSubspace):
            ss.to_low_dim(sub, x, auto_project=False)
        np.testing.assert_allclose(ss.to_low_dim(sub, x), geo.normalize(S2.with_dim(1), [1.0, 0.2]))

    def test_invalid_low_point(self):
        with pytest.raises(geo.InvalidPoint):
            ss.from_low_dim(coord_sub(H2, 1), [1.0, 1.0])
        with pytest.raises(ValueError):
            ss.from_low_dim(coord_sub(H2, 1), [1.0, 0.0, 0.0])


class TestSlicedMatrix:
    @pytest.mark.parametrize("space", oracles.spaces(), ids=str)
    def test_identities(self, space):
        sub, _ = random_sub(space, 3, 9)
        g = ss.as_sliced_matrix(sub)
        assert g.shape == (space.dim + 1, 4)
        if space.spherical:
            np.testing.assert_allclose(g.T @ g, np.eye(4), atol=1e-10)
        else:
            jd = np.diag(space.signature)
            np.testing.assert_allclose(g.T @ jd @ g, np.diag([-1.0, 1, 1, 1]), atol=1e-10)

    def test_examples(self):
        g = ss.as_sliced_matrix(AffineSubspace(S2, e(0), np.zeros((3, 0))))
        np.testing.assert_array_equal(g, e(0)[:, None])
        np.testing.assert_array_equal(ss.as_sliced_matrix(coord_sub(H2, 1)), np.eye(3)[:, :2])


@pytest.mark.parametrize("space", oracles.spaces(), ids=str)
def test_geodesic_submanifold(space):
    sub, rng = random_sub(space, 2, 10)
    c = rng.standard_normal((40, 2)) * 0.7
    y = geo.exp_map(space, sub.base, c @ sub.basis.T / space.scale)
    a, b = y[:20], y[20:]
    for t in (0.25, 0.5, 0.9):
        mid = geo.exp_map(space, a, t * geo.log_map(space, a, b))
        assert np.all(ss.residual_energy(sub, mid) <= 1e-8)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(oracles.spaces()), st.integers(1, 3))
def test_energy_and_distance_agree(seed, space, k):
    sub, rng = random_sub(space, k, seed)
    x = oracles.random_points(space, 10, rng, spread=0.7)
    e_res = ss.residual_energy(sub, x)
    d = ss.projection_distance(sub, x)
    t = space.scale * d
    if space.spherical:
        np.testing.assert_allclose(np.sin(t) ** 2, e_res, atol=1e-10)
    else:
        np.testing.assert_allclose(np.sinh(t) ** 2, e_res, rtol=1e-9, atol=1e-10)
