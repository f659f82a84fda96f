import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spaceforms import geometry as geo
from spaceforms.geometry import Kind, SpaceForm

import oracles

S2 = SpaceForm.sphere(2)
H2 = SpaceForm.hyperboloid(2)


def e(i, n=3):
    v = np.zeros(n)
    v[i] = 1.0
    return v


class TestSpaceForm:
    def test_curvature_sign(self):
        with pytest.raises(ValueError):
            SpaceForm(Kind.SPHERICAL, -1.0, 3)
        with pytest.raises(ValueError):
            SpaceForm(Kind.HYPERBOLIC, 1.0, 3)
        with pytest.raises(ValueError):
            SpaceForm.sphere(3, 0.0)

    def test_dimension(self):
        with pytest.raises(ValueError):
            SpaceForm.sphere(0)
        with pytest.raises(ValueError):
            SpaceForm.sphere(2.5)
        assert SpaceForm.hyperboloid(3).ambient_dim == 4

    def test_kind_from_string(self):
        assert SpaceForm("hyperbolic", -2, 3).kind is Kind.HYPERBOLIC

    def test_origin(self):
        sp = SpaceForm.hyperboloid(3, -4.0)
        assert geo.is_point(sp, sp.origin())
        np.testing.assert_allclose(sp.origin(), [0.5, 0, 0, 0])


class TestMetric:
    def test_examples(self):
        assert geo.metric(S2, e(1), e(1)) == 1.0
        assert geo.metric(H2, e(0), e(0)) == -1.0
        assert geo.metric(H2, [1, 2, 0], [3, 4, 0]) == 5.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            geo.metric(S2, np.ones(3), np.ones(4))

    def test_broadcast(self):
        x = np.arange(12.0).reshape(4, 3)
        np.testing.assert_allclose(geo.metric(H2, x, x), [geo.metric(H2, r, r) for r in x])


class TestDistance:
    def test_examples(self):
        assert geo.distance(S2, e(1), e(1)) == 0.0
        assert geo.distance(H2, e(0), e(0)) == 0.0
        assert geo.distance(S2, e(1), e(2)) == pytest.approx(np.pi / 2, abs=1e-15)
        y = np.array([np.cosh(1), np.sinh(1), 0])
        assert geo.distance(H2, e(0), y) == pytest.approx(1.0, abs=1e-15)

    def test_antipodal(self):
        assert geo.distance(S2, e(1), -e(1)) == pytest.approx(np.pi, abs=1e-15)

    def test_curvature_scaling(self):
        sp = SpaceForm.sphere(2, 4.0)
        # radius 1/2, quarter turn
        assert geo.distance(sp, e(0) / 2, e(1) / 2) == pytest.approx(np.pi / 4)
        hp = SpaceForm.hyperboloid(2, -4.0)
        y = np.array([np.cosh(1), np.sinh(1), 0]) / 2
        assert geo.distance(hp, e(0) / 2, y) == pytest.approx(0.5)

    def test_small_distances_are_accurate(self):
        # acos/acosh of the inner product would only resolve ~1e-8 here
        t = 1e-12
        assert geo.distance(S2, e(0), [np.cos(t), np.sin(t), 0]) == pytest.approx(t, rel=1e-6)
        assert geo.distance(H2, e(0), [np.cosh(t), np.sinh(t), 0]) == pytest.approx(t, rel=1e-6)

    @pytest.mark.parametrize("space", oracles.spaces(), ids=str)
    def test_matches_textbook_formula(self, space):
        rng = np.random.default_rng(1)
        x = oracles.random_points(space, 50, rng)
        y = oracles.random_points(space, 50, rng)
        np.testing.assert_allclose(geo.distance(space, x, y), oracles.dist(space, x, y), rtol=1e-9, atol=1e-7)

    def test_symmetric(self):
        rng = np.random.default_rng(2)
        for space in oracles.spaces():
            x = oracles.random_points(space, 20, rng)
            y = oracles.random_points(space, 20, rng)
            assert np.array_equal(geo.distance(space, x, y), geo.distance(space, y, x))


class TestExpLog:
    def test_exp_examples(self):
        np.testing.assert_array_equal(geo.exp_map(S2, e(0), np.zeros(3)), e(0))
        np.testing.assert_allclose(geo.exp_map(S2, e(1), np.pi / 2 * e(2)), e(2), atol=1e-15)
        t = 0.7
        np.testing.assert_allclose(geo.exp_map(H2, e(0), t * e(1)), [np.cosh(t), np.sinh(t), 0], rtol=1e-15)

    def test_log_examples(self):
        np.testing.assert_array_equal(geo.log_map(S2, e(1), e(1)), np.zeros(3))
        np.testing.assert_allclose(geo.log_map(S2, e(1), e(2)), np.pi / 2 * e(2), atol=1e-15)

    def test_antipode_raises(self):
        with pytest.raises(geo.AntipodalPoint):
            geo.log_map(S2, e(1), -e(1))

    @pytest.mark.parametrize("space", oracles.spaces(), ids=str)
    def test_round_trip_and_norm(self, space):
        # ambient coordinates lose accuracy like |x|^2 far from the origin,
        # so the 1e-8 bound is checked on moderately placed clouds
        rng = np.random.default_rng(3)
        p = oracles.random_points(space, 1, rng, spread=0.5)[0]
        x = oracles.random_points(space, 100, rng, spread=0.5)
        v = geo.log_map(space, p, x)
        np.testing.assert_allclose(geo.metric(space, v, p), 0, atol=1e-9)
        np.testing.assert_allclose(geo.norm(space, v), geo.distance(space, p, x), rtol=1e-8)
        back = geo.exp_map(space, p, v)
        np.testing.assert_allclose(back, x, rtol=1e-8, atol=1e-8 * np.max(np.abs(x)))

    @pytest.mark.parametrize("space", oracles.spaces(), ids=str)
    def test_exp_matches_textbook(self, space):
        rng = np.random.default_rng(4)
        p = oracles.random_points(space, 1, rng, spread=0.5)[0]
        for _ in range(20):
            v = geo.tangent_project(space, p, rng.standard_normal(space.dim + 1))
            got = geo.exp_map(space, p, v)
            np.testing.assert_allclose(got, oracles.expo(space, p, v), rtol=1e-9, atol=1e-9 * np.max(np.abs(got)))

    def test_exp_far_from_origin_stays_valid(self):
        space = SpaceForm.hyperboloid(2, -2.0)
        p = geo.exp_map(space, space.origin(), np.array([0, -1.5, 0.0]))
        v = geo.tangent_project(space, p, np.array([-1.5, -1.5, 0.0]))
        x = geo.exp_map(space, p, v)
        assert x[0] > 0
        assert geo.distance(space, p, x) == pytest.approx(geo.norm(space, v), rel=1e-6)

    def test_exp_stays_on_manifold(self):
        rng = np.random.default_rng(5)
        for space in oracles.spaces():
            p = oracles.random_points(space, 1, rng)[0]
            v = geo.tangent_project(space, p, rng.standard_normal((200, space.dim + 1)))
            x = geo.exp_map(space, p, v)
            geo.check_points(space, x, 1e-9)


class TestTangentProject:
    def test_examples(self):
        np.testing.assert_array_equal(geo.tangent_project(S2, e(0), e(1)), e(1))
        np.testing.assert_array_equal(geo.tangent_project(S2, e(0), e(0)), np.zeros(3))

    @pytest.mark.parametrize("space", oracles.spaces(), ids=str)
    def test_orthogonal_and_idempotent(self, space):
        rng = np.random.default_rng(6)
        p = oracles.random_points(space, 1, rng)[0]
        w = rng.standard_normal((50, space.dim + 1))
        t = geo.tangent_project(space, p, w)
        np.testing.assert_allclose(geo.metric(space, t, p), 0, atol=1e-10)
        np.testing.assert_allclose(geo.tangent_project(space, p, t), t, atol=1e-12)


class TestValidation:
    def test_valid(self):
        geo.check_points(H2, [[1, 0, 0], [np.cosh(2), np.sinh(2), 0]])

    def test_reports_row(self):
        x = np.array([[1, 0, 0], [1, 0, 0], [2, 0, 0]])
        with pytest.raises(geo.InvalidPoint) as err:
            geo.check_points(H2, x)
        assert err.value.row == 2
        assert "row 2" in str(err.value)

    def test_lower_sheet_rejected(self):
        with pytest.raises(geo.InvalidPoint, match="x_0"):
            geo.check_points(H2, [[-1.0, 0, 0]])

    def test_non_finite_rejected(self):
        assert not geo.is_point(S2, [np.nan, 0, 0])

    def test_relative_tolerance(self):
        assert geo.is_point(S2, [1 + 1e-8, 0, 0])
        assert not geo.is_point(S2, [1 + 1e-5, 0, 0])

    def test_normalize_rejects_spacelike(self):
        with pytest.raises(geo.InvalidPoint):
            geo.normalize(H2, [0.0, 1.0, 0.0])

    def test_normalize_flips_sheet(self):
        np.testing.assert_allclose(geo.normalize(H2, [-2.0, 0, 0]), e(0))


finite = st.floats(-1.0, 1.0, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(st.lists(finite, min_size=3, max_size=3), st.lists(finite, min_size=3, max_size=3),
       st.sampled_from(oracles.spaces()[:1] + [SpaceForm.hyperboloid(2, -2.0)]))
def test_log_exp_inverse_property(a, b, space):
    space = space.with_dim(2)
    p = geo.exp_map(space, space.origin(), geo.tangent_project(space, space.origin(), np.array(a)))
    v = geo.tangent_project(space, p, np.array(b))
    if space.spherical and space.scale * geo.norm(space, v) >= np.pi - 1e-3:
        return
    x = geo.exp_map(space, p, v)
    np.testing.assert_allclose(geo.log_map(space, p, x), v, atol=1e-9 * (1 + np.max(np.abs(x)) ** 2))
