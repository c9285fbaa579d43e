import numpy as np
import pytest
from scipy.linalg import sqrtm

from symspace import gi
from symspace.errors import DimensionError, InvalidPointError, SingularMatrixError
from symspace.matkernels import spd_log
from symspace.oracles import busemann_limit_oracle, iwasawa_qr_oracle


def test_coset_rep_basics(draw):
    assert np.array_equal(gi.coset_rep(np.eye(3)).g, np.eye(3))
    x = draw.spd(4)
    g = gi.coset_rep(x)
    np.testing.assert_allclose(gi.spd_point(g), x, atol=1e-10)
    np.testing.assert_allclose(g.g @ g.g_inv, np.eye(4), atol=1e-12)
    k = draw.orth(4)
    np.testing.assert_allclose(gi.spd_point(g.g @ k), gi.spd_point(g), atol=1e-12)
    with pytest.raises(SingularMatrixError):
        gi.CosetRep(np.diag([1.0, 1e-13]))


def test_group_law(draw):
    x, y = draw.spd(3), draw.spd(3)
    np.testing.assert_allclose(gi.gi_oplus(np.eye(3), y), y, atol=1e-13)
    np.testing.assert_allclose(gi.gi_oplus(gi.gi_ominus(x, rep=True), x), np.eye(3), atol=1e-12)
    np.testing.assert_allclose(gi.gi_ominus_oplus(x, x), np.eye(3), atol=1e-12)
    g = gi.coset_rep(x)
    np.testing.assert_allclose(gi.gi_oplus(x, y), g.g @ y @ g.g.T, atol=1e-12)
    # the inverse of the canonical representative sits on the diagonal
    lam = np.linalg.eigvalsh(x)[::-1]
    np.testing.assert_allclose(gi.gi_ominus(x), np.diag(1 / lam), atol=1e-12)


def test_group_law_is_not_commutative():
    x = np.array([[2.0, 1.0], [1.0, 2.0]])
    y = np.diag([3.0, 0.5])
    assert np.max(np.abs(gi.gi_oplus(x, y) - gi.gi_oplus(y, x))) > 0.1


def test_cartan(draw):
    assert np.array_equal(gi.cartan_mu(np.eye(3)), np.zeros(3))
    np.testing.assert_allclose(gi.cartan_mu(draw.orth(3)), 0.0, atol=1e-14)
    g = np.random.default_rng(1).standard_normal((4, 4))
    kl, mu, kr = gi.cartan_decompose(g)
    assert np.all(np.diff(mu) <= 0)
    np.testing.assert_allclose(kl @ np.diag(np.exp(mu)) @ kr, g, atol=1e-9)


def test_inner_norm_distance(draw):
    y = draw.spd(3)
    assert gi.gi_inner(np.eye(3), y) == 0.0
    x = draw.spd(3)
    assert gi.gi_inner(x, x) == pytest.approx(gi.gi_dist(np.eye(3), x) ** 2, rel=1e-12)
    assert gi.gi_norm(x) == pytest.approx(gi.gi_dist(np.eye(3), x), abs=1e-12)
    # half the affine-invariant distance, computed here with scipy's sqrtm
    r = np.linalg.inv(sqrtm(x).real)
    ai = np.linalg.norm(spd_log(r @ y @ r))
    assert gi.gi_dist(x, y) == pytest.approx(ai / 2, abs=1e-10)
    assert gi.affine_invariant_dist(x, y) == pytest.approx(ai, abs=1e-10)
    assert gi.gi_norm(gi.gi_ominus_oplus(x, y)) == pytest.approx(gi.gi_dist(x, y), abs=1e-10)


def test_inner_product_k_invariance(draw):
    for m in (2, 4, 6):
        x, y, k = draw.spd(m), draw.spd(m), draw.orth(m)
        assert gi.gi_inner(gi.act(k, x), gi.act(k, y)) == pytest.approx(gi.gi_inner(x, y), abs=1e-10)


def test_iwasawa_examples(draw):
    k = draw.orth(3)
    np.testing.assert_allclose(gi.iwasawa_H(k).H, 0.0, atol=1e-14)
    d = np.array([2.0, 0.5, 3.0])
    res = gi.iwasawa_H(np.diag(d))
    np.testing.assert_allclose(res.H, np.log(d), atol=1e-15)
    g = np.random.default_rng(5).standard_normal((5, 5))
    res = gi.iwasawa_H(g)
    assert np.all(np.tril(res.n, -1) == 0) and np.all(np.diagonal(res.n) == 1)
    np.testing.assert_allclose(res.k.T @ res.k, np.eye(5), atol=1e-8)
    np.testing.assert_allclose(res.k @ np.diag(np.exp(res.H)) @ res.n, g, atol=1e-8)


def test_iwasawa_matches_qr_at_condition_1e4(draw):
    for m in (2, 4, 6):
        g = draw.orth(m) @ np.diag(np.logspace(0, -4, m)) @ draw.orth(m)
        h, n, k = iwasawa_qr_oracle(g)
        res = gi.iwasawa_H(g)
        np.testing.assert_allclose(res.H, h, atol=1e-10)
        np.testing.assert_allclose(res.k, k, atol=1e-10)


def test_busemann_gi_examples(draw):
    a = np.array([0.8, 0.6])
    assert gi.busemann_gi(None, a, np.eye(2)) == pytest.approx(0.0, abs=1e-15)
    for s in (0.3, 2.0):
        assert gi.busemann_gi(None, a, np.diag(np.exp(2 * s * a))) == pytest.approx(-s, abs=1e-12)
    k = draw.orth(2)
    assert gi.busemann_gi(k, a, gi.ray_point(k, a, 1.5)) == pytest.approx(-1.5, abs=1e-12)
    with pytest.raises(InvalidPointError):
        gi.busemann_gi(None, np.array([1.0, 1.0]), np.eye(2))
    with pytest.raises(DimensionError):
        gi.busemann_gi(None, np.array([1.0, 0.0, 0.0]), np.eye(2))


def test_busemann_gi_matches_limit_at_large_t(draw):
    for m in (2, 3, 5):
        k, x = draw.orth(m), draw.spd(m)
        a = np.sort(draw.unit(m))[::-1]
        closed = gi.busemann_gi(k, a, x)
        assert busemann_limit_oracle("gi", (k, a), x, 1e6) == pytest.approx(closed, abs=1e-4)


def test_chamber_form_describes_same_ray(draw):
    k, a = draw.orth(3), draw.unit(3)
    k2, a2 = gi.chamber_form(k, a)
    assert np.all(np.diff(a2) <= 0)
    np.testing.assert_allclose(gi.ray_point(k2, a2, 0.7), gi.ray_point(k, a, 0.7), atol=1e-12)
    x = draw.spd(3)
    assert gi.busemann_gi(k2, a2, x) == pytest.approx(busemann_limit_oracle("gi", (k, a), x, 1e6), abs=1e-4)


def test_b_distance_gi(draw):
    p, x = draw.spd(3), draw.spd(3)
    a = draw.unit(3)
    hp = gi.GiHyperplane(a, p, draw.orth(3))
    assert gi.b_distance_gi(hp, p) == 0.0
    hp_id = gi.GiHyperplane(a, np.eye(3))
    assert gi.b_distance_gi(hp_id, x) == pytest.approx(gi.busemann_gi(None, a, x), abs=1e-12)
    assert gi.b_distance_gi(hp, x) == pytest.approx(gi.b_distance_gi_definition(hp, x), abs=1e-8)


def test_b_distance_gi_representative_independent(draw):
    # replacing the canonical representative by g q leaves H(g^-1 h k) unchanged
    x, p, k, q = draw.spd(4), draw.spd(4), draw.orth(4), draw.orth(4)
    a = draw.unit(4)
    g, h = gi.coset_rep(x), gi.coset_rep(p)
    ref = a @ gi.iwasawa_H(g.g_inv @ h.g @ k).H
    alt = a @ gi.iwasawa_H(q.T @ g.g_inv @ h.g @ k).H
    assert alt == pytest.approx(ref, abs=1e-10)
    assert gi.b_distance_gi(gi.GiHyperplane(a, p, k), x) == pytest.approx(ref, abs=1e-12)


def test_fc_gi(draw, rng):
    layer = gi.FcLayerGi.random(3, 2, rng)
    out = gi.fc_layer_gi_forward(layer, draw.spd(3))
    assert out.shape == (2, 2) and np.all(np.linalg.eigvalsh(out) > 0)
    np.testing.assert_allclose(gi.fc_gi_output(np.eye(3), np.zeros(3)), np.eye(3))
    assert gi.fc_gi_output(np.eye(1), [0.4])[0, 0] == pytest.approx(np.exp(-0.8))
    with pytest.raises(DimensionError):
        gi.fc_layer_gi_forward(layer, np.eye(2))
    with pytest.raises(InvalidPointError):
        gi.FcLayerGi(np.eye(2), np.stack([np.eye(2)] * 2), np.array([[2.0, 0.0], [0.0, 1.0]]))


def test_fc_gi_round_trip(rng, draw):
    for learn_k in (False, True):
        layer = gi.FcLayerGi.random(4, 3, rng, learn_k=learn_k)
        x = draw.spd(4)
        v = gi.fc_gi_responses(layer, x)
        z = gi.fc_layer_gi_forward(layer, x)
        eye = np.eye(3)
        rec = [gi.b_distance_gi(gi.GiHyperplane(eye[j], eye), z) for j in range(3)]
        np.testing.assert_allclose(rec, v, atol=1e-8)


def test_fc_responses_are_busemann_of_translated_input(rng, draw):
    layer = gi.FcLayerGi.random(3, 2, rng, learn_k=True)
    x = draw.spd(3)
    v = gi.fc_gi_responses(layer, x)
    for j in range(2):
        y = gi.gi_ominus_oplus(layer.p[j], x)
        assert v[j] == pytest.approx(gi.busemann_gi(layer.k[j], layer.a[j], y), abs=1e-10)


def test_orthogonal_from_skew(rng):
    q = gi.orthogonal_from_skew(rng.standard_normal((4, 4)))
    np.testing.assert_allclose(q.T @ q, np.eye(4), atol=1e-13)


def test_fused_translation_matches_composed_route(draw):
    for m in (2, 4):
        p, x = draw.spd(m), draw.spd(m)
        composed = gi.gi_oplus(gi.gi_ominus(p, rep=True), x)
        np.testing.assert_allclose(gi.gi_ominus_oplus(p, x), composed, atol=1e-12)
