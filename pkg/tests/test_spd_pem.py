import numpy as np
import pytest

from symspace import spd_pem as pem
from symspace.errors import DimensionError, DomainError
from symspace.matkernels import spd_log, sym_exp

LE = pem.LOG_EUCLIDEAN


def test_phi_round_trip(draw):
    for phi in (LE, pem.power_phi(0.5), pem.power_phi(1.0)):
        x = draw.spd(4)
        np.testing.assert_allclose(phi.phi_inv(phi.phi(x)), x, rtol=1e-9, atol=1e-9)


def test_power_map_tends_to_log(draw):
    x = draw.spd(3)
    err = [np.max(np.abs(pem.power_phi(th).phi(x) - spd_log(x))) for th in (1e-2, 1e-3, 1e-4)]
    assert err[0] > err[1] > err[2] and err[2] < 1e-3


def test_power_inverse_outside_image():
    with pytest.raises(DomainError):
        pem.power_phi(0.5).phi_inv(np.diag([-3.0, 0.0]))
    with pytest.raises(ValueError):
        pem.power_phi(0.0)


def test_group_law_le(draw):
    x, y = draw.spd(3), draw.spd(3)
    np.testing.assert_allclose(pem.pem_oplus(LE, np.eye(3), y), y, atol=1e-12)
    np.testing.assert_allclose(pem.pem_oplus(LE, x, pem.pem_ominus(LE, x)), np.eye(3), atol=1e-12)
    np.testing.assert_allclose(pem.pem_oplus(LE, x, y), pem.pem_oplus(LE, y, x), atol=1e-10)


def test_inner_and_distance(draw):
    a = draw.sym(3)
    assert pem.pem_dist(LE, np.eye(3), sym_exp(a)) == pytest.approx(np.linalg.norm(a), abs=1e-12)
    x, p = draw.spd(3), draw.spd(3)
    assert pem.pem_dist(LE, x, x) == 0.0
    assert pem.pem_norm(LE, pem.pem_oplus(LE, pem.pem_ominus(LE, p), x)) == pytest.approx(pem.pem_dist(LE, p, x), abs=1e-10)
    assert pem.pem_inner(LE, x, x) == pytest.approx(pem.pem_norm(LE, x) ** 2)


def test_metric_axioms(draw):
    for _ in range(50):
        x, y, z = draw.spd(3), draw.spd(3), draw.spd(3)
        d = lambda u, v: pem.pem_dist(LE, u, v)
        assert d(x, z) <= d(x, y) + d(y, z) + 1e-10
        assert abs(d(x, y) - d(y, x)) < 1e-10


def test_busemann_pem(draw):
    a = draw.sym(3)
    a /= np.linalg.norm(a)
    assert pem.busemann_pem(LE, a, np.eye(3)) == pytest.approx(0.0, abs=1e-15)
    for t in (0.5, 3.0):
        assert pem.busemann_pem(LE, a, sym_exp(t * a)) == pytest.approx(-t, abs=1e-12)
    with pytest.raises(ValueError):
        pem.busemann_pem(LE, 2 * a, np.eye(3))


def test_hyperplane_normalizes():
    hp = pem.PemHyperplane(np.diag([3.0, 4.0]), np.eye(2))
    assert np.linalg.norm(hp.a) == pytest.approx(1.0, abs=1e-15)


def test_b_distance_pem(draw):
    for phi in (LE, pem.power_phi(0.5)):
        hp = pem.PemHyperplane(draw.sym(3), np.eye(3) * 1.1)
        assert pem.b_distance_pem(phi, hp, hp.p) == 0.0
        x = np.eye(3) * 0.9 + 0.05 * draw.sym(3)
        closed = pem.b_distance_pem(phi, hp, x)
        assert closed == pytest.approx(pem.b_distance_pem_definition(phi, hp, x), abs=1e-12)
        # Euclidean distance of phi(x) to the plane <a, y - phi(p)> = 0
        euclid = abs(np.sum(hp.a * (phi.phi(x) - phi.phi(hp.p))))
        assert abs(closed) == pytest.approx(euclid, abs=1e-13)


def test_le_riemannian_ops(draw):
    x, y = draw.spd(3), draw.spd(3)
    u = pem.le_log(x, y)
    np.testing.assert_allclose(pem.le_exp(x, u), y, atol=1e-10)
    # metric norm of the log equals the distance
    assert np.sqrt(pem.le_metric(x, u, u)) == pytest.approx(pem.pem_dist(LE, x, y), rel=1e-10)
    # transport is an isometry of the metric
    v = draw.sym(3)
    tv = pem.le_transport(x, y, v)
    assert pem.le_metric(y, tv, tv) == pytest.approx(pem.le_metric(x, v, v), rel=1e-10)


def test_dlog_matches_finite_difference(draw):
    x, e = draw.spd(3), draw.sym(3)
    h = 1e-6
    fd = (spd_log(x + h * e) - spd_log(x - h * e)) / (2 * h)
    np.testing.assert_allclose(pem.dlog(x, e), fd, atol=1e-7)
    # repeated eigenvalues take the limiting branch
    np.testing.assert_allclose(pem.dlog(2 * np.eye(3), e), e / 2, atol=1e-15)
    np.testing.assert_allclose(pem.dexp(np.zeros((3, 3)), e), e, atol=1e-15)


def _layer(draw, m_in, m_out, scale=1.0):
    k = m_out * (m_out + 1) // 2
    return pem.FcLayerLe.from_logs([draw.sym(m_in, scale) for _ in range(k)],
                                   [draw.sym(m_in, scale) for _ in range(k)], m_out)


def test_fc_le_shapes_and_validation(draw):
    layer = _layer(draw, 3, 2)
    assert layer.m_in == 3 and layer.m_out == 2
    out = pem.fc_layer_le_forward(layer, draw.spd(3))
    assert out.shape == (2, 2) and np.all(np.linalg.eigvalsh(out) > 0)
    with pytest.raises(DimensionError):
        pem.fc_layer_le_forward(layer, np.eye(2))
    with pytest.raises(DimensionError):
        pem.FcLayerLe(np.stack([np.eye(2)] * 2), np.stack([np.eye(2)] * 2), 2)


def test_fc_le_zero_responses_give_identity(draw):
    x = draw.spd(3)
    layer = pem.FcLayerLe(np.stack([x] * 3), np.stack([draw.spd(3) for _ in range(3)]), 2)
    np.testing.assert_allclose(pem.fc_layer_le_forward(layer, x), np.eye(2), atol=1e-14)


def test_fc_le_scalar_case(draw):
    layer = _layer(draw, 2, 1)
    x = draw.spd(2)
    v = np.sum((spd_log(x) - layer.log_p[0]) * layer.log_a[0])
    assert pem.fc_layer_le_forward(layer, x)[0, 0] == pytest.approx(np.exp(v), rel=1e-13)


def test_fc_le_round_trip(draw):
    layer = _layer(draw, 3, 4, scale=0.5)
    x = draw.spd(3)
    v = pem.fc_le_responses(layer, x)
    log_out = spd_log(pem.fc_layer_le_forward(layer, x))
    rec = [np.sum(log_out * e) for e in pem.sym_basis(4)]
    np.testing.assert_allclose(rec, v, atol=1e-10)


def test_sym_basis_is_orthonormal():
    basis = pem.sym_basis(4)
    gram = np.array([[np.sum(a * b) for b in basis] for a in basis])
    np.testing.assert_allclose(gram, np.eye(10), atol=1e-15)


def test_wfm(draw):
    x, y, g = draw.spd(3), draw.spd(3), draw.spd(3)
    np.testing.assert_allclose(pem.wfm_le([x], [1.0]), x, atol=1e-12)
    np.testing.assert_allclose(pem.wfm_le([x, x], [0.5, 0.5]), x, atol=1e-12)
    w = [0.2, 0.3, 0.5]
    pts = [x, y, draw.spd(3)]
    shifted = pem.wfm_le([pem.pem_oplus(LE, g, p) for p in pts], w)
    np.testing.assert_allclose(shifted, pem.pem_oplus(LE, g, pem.wfm_le(pts, w)), rtol=1e-10, atol=1e-10)
    with pytest.raises(ValueError, match="sum"):
        pem.wfm_le([x, y], [0.5, 0.6])
    with pytest.raises(ValueError, match="positive"):
        pem.wfm_le([x, y], [1.5, -0.5])
