import math

import numpy as np
import pytest

import idci


def textbook_kde(points, weights, h, query):
    w = weights / weights.sum()
    d = points.shape[1]
    inv = np.linalg.inv(h)
    norm = 1.0 / math.sqrt((2 * math.pi) ** d * np.linalg.det(h))
    out = []
    for q in query:
        diff = points - q
        out.append(norm * np.sum(w * np.exp(-0.5 * np.einsum("ij,jk,ik->i", diff, inv, diff))))
    return np.array(out)


def test_weighted_kde_matches_direct_sum():
    rng = np.random.default_rng(4)
    x = rng.normal(size=(200, 2))
    w = rng.uniform(0.2, 2.0, size=200)
    kde = idci.fit_kde(x, w)
    q = rng.normal(size=(15, 2))
    ref = textbook_kde(x, w, np.asarray(kde.bandwidth), q)
    np.testing.assert_allclose(np.exp(kde.log_density(q)), ref, rtol=1e-10)


def test_scott_bandwidth_uniform_weights():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(500, 1)) * 3.0
    h = idci.scott_bandwidth(x, np.full(500, 1 / 500))
    expected = 500 ** (-2 / 5) * np.var(x[:, 0], ddof=1)
    assert h[0, 0] == pytest.approx(expected, rel=1e-12)


def test_gaussian_kl_per_dimension_sum():
    # KL(N(0, I) || N(0, 4 I)) in 2-d: twice the 1-d value 0.5 * (1/4 - 1 + ln 4).
    per_dim = 0.5 * (0.25 - 1.0 + math.log(4.0))
    got = idci.gaussian_kl(np.zeros(2), np.eye(2), np.zeros(2), 4 * np.eye(2))
    assert got == pytest.approx(2 * per_dim, rel=1e-14)


def test_discrete_iteration_reaches_product():
    rng = np.random.default_rng(6)
    dg = rng.uniform(0.05, 1.0, size=(3, 3))
    dg /= dg.sum()
    r, c = dg.sum(axis=1), dg.sum(axis=0)
    res = idci.iterate_discrete([3, 3], [1 / 9] * 9, [[0], [1]], [r.tolist(), c.tolist()])
    np.testing.assert_allclose(np.array(res["limit"]).reshape(3, 3), np.outer(r, c), atol=1e-10)
    assert idci.discrete_pushforward([3, 3], res["limit"], [1]) == pytest.approx(c.tolist(), abs=1e-10)


def test_example_run_and_report_round_trip():
    g = idci.gen_linear2d(1000, 0)
    cfg = idci.parse_config("abs_kl_tol = 1e-7\n")
    report = idci.run_iterative_dci(g["params"], g["qoi"], g["partition"], g["observed"], cfg)
    assert report.termination in ("RelKl", "AbsKl")
    # weights are kept unnormalized; the last accepted update bounds their mean
    assert abs(np.mean(report.final_weights) - 1.0) < 0.1
    assert len(report.per_iteration) == 2 * report.epochs_run
    back = idci.report_from_json(report.to_json())
    assert back.to_json() == report.to_json()


def test_update_diagnostic_is_mean_ratio():
    w, diag = idci.apply_update(np.ones(4), np.array([0.5, 1.0, 1.5, 3.0]))
    assert diag == pytest.approx(1.5)
    np.testing.assert_allclose(w, [0.5, 1.0, 1.5, 3.0])


def test_errors_carry_codes():
    with pytest.raises(idci.IdciError) as info:
        idci.parse_config("")
    assert info.value.code == "MissingRequiredField"
    with pytest.raises(idci.IdciError) as info:
        idci.fit_kde(np.ones((10, 1)))
    assert info.value.code == "DegenerateCovariance"
