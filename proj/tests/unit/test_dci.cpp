#include <doctest.h>

#include <cmath>

#include "idci/dci.hpp"
#include "idci/error.hpp"
#include "idci/problems.hpp"
#include "oracles.hpp"
#include "property.hpp"

using namespace idci;

TEST_CASE("identical observed and predicted samples give unit ratios") {
  std::mt19937_64 rng(1);
  const Matrix q = prop::normal_matrix(rng, 300, 2);
  const Vector r = compute_update_ratios(q, WeightVector::ones(300), q);
  CHECK((r.array() - 1.0).abs().maxCoeff() < 1e-10);
}

TEST_CASE("ratios agree with the textbook KDE quotient") {
  prop::for_all(41, [](std::mt19937_64& rng) {
    const std::size_t n = prop::index(rng, 5, 25), m = prop::index(rng, 5, 25);
    const Matrix pred = prop::normal_matrix(rng, n, 1);
    const Matrix obs = (prop::normal_matrix(rng, m, 1, 0.7).array() + 0.2).matrix();
    const Vector w = prop::positive_vector(rng, n);
    const Vector r = compute_update_ratios(pred, WeightVector(w), obs);
    const Matrix hp = oracle::scott(pred, w), ho = oracle::scott(obs, Vector::Ones(static_cast<Eigen::Index>(m)));
    for (Eigen::Index j = 0; j < pred.rows(); ++j) {
      const Vector qj = pred.row(j).transpose();
      const double expect = oracle::kde(obs, Vector::Ones(static_cast<Eigen::Index>(m)), ho, qj) / oracle::kde(pred, w, hp, qj);
      CHECK(std::abs(r[j] - expect) <= 1e-9 * expect + 1e-300);
    }
  });
}

TEST_CASE("apply_update examples") {
  {
    const auto s = apply_update(WeightVector(Vector::Ones(2)), (Vector(2) << 2.0, 0.0).finished());
    CHECK(s.new_weights[0] == 2.0);
    CHECK(s.new_weights[1] == 0.0);
    CHECK(s.diagnostic == 1.0);
  }
  {
    const auto s = apply_update(WeightVector(Vector::Ones(3)), Vector::Ones(3));
    CHECK((s.new_weights.values().array() == 1.0).all());
    CHECK(s.diagnostic == 1.0);
  }
  {
    const auto s = apply_update(WeightVector((Vector(2) << 0.5, 1.5).finished()), (Vector(2) << 2.0, 2.0 / 3.0).finished());
    CHECK(s.new_weights[0] == doctest::Approx(1.0));
    CHECK(s.new_weights[1] == doctest::Approx(1.0));
    CHECK(s.diagnostic == doctest::Approx(1.0));
  }
  try {
    apply_update(WeightVector(Vector::Ones(2)), Vector::Ones(3));
    FAIL("expected LengthMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LengthMismatch);
  }
}

TEST_CASE("check_diagnostic examples") {
  CHECK(check_diagnostic(1.0, 0.1) == DiagnosticStatus::Pass);
  CHECK(check_diagnostic(1.138, 0.1) == DiagnosticStatus::Fail);
  CHECK(check_diagnostic(1.068, 0.1) == DiagnosticStatus::Pass);
  CHECK(check_diagnostic(0.572, 0.1) == DiagnosticStatus::Fail);
}

TEST_CASE("zero predicted density handling") {
  Vector lo(3), lp(3);
  lo << -1.0, -INFINITY, -2.0;
  lp << -1.0, -INFINITY, -2.0;
  const Vector r = ratios_from_log_densities(lo, lp);
  CHECK(r[0] == 1.0);
  CHECK(r[1] == 0.0);
  lo[1] = -5.0;
  try {
    ratios_from_log_densities(lo, lp);
    FAIL("expected PredictedDensityUnderflow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PredictedDensityUnderflow);
    CHECK(e.row() == 1);
  }
  lp[1] = -1e6;  // representable in log space, ratio is not
  CHECK_THROWS_AS(ratios_from_log_densities(lo, lp), Error);
}

TEST_CASE("example 1 single-step diagnostics") {
  const auto g = gen_linear2d(1000, 0, Linear2dVariant::TwoQoI);
  const Matrix& pred = g.predicted.qoi();
  const Vector joint = compute_update_ratios(pred, WeightVector::ones(1000), g.observed_qoi);
  const double dj = apply_update(WeightVector::ones(1000), joint).diagnostic;
  CHECK(dj >= 1.0);
  CHECK(dj <= 1.3);
  CHECK(check_diagnostic(dj, 0.1) == DiagnosticStatus::Fail);

  const Matrix prod = product_of_marginals_observed({g.observed_qoi.col(0), g.observed_qoi.col(1)}, 0);
  const double dp = apply_update(WeightVector::ones(1000), compute_update_ratios(pred, WeightVector::ones(1000), prod)).diagnostic;
  CHECK(dp >= 0.45);
  CHECK(dp <= 0.70);
}

TEST_CASE("update direction is invariant to weight scale") {
  prop::for_all(42, [](std::mt19937_64& rng) {
    const std::size_t n = prop::index(rng, 5, 30);
    const Matrix pred = prop::normal_matrix(rng, n, 1);
    const Matrix obs = (prop::normal_matrix(rng, n, 1, 0.5).array() + 0.3).matrix();
    const WeightVector w(prop::positive_vector(rng, n));
    const double c = std::exp(prop::uniform(rng, -4, 4));
    const WeightVector wc(c * w.values());
    const auto a = normalize_unit_mean(apply_update(w, compute_update_ratios(pred, w, obs)).new_weights);
    const auto b = normalize_unit_mean(apply_update(wc, compute_update_ratios(pred, wc, obs)).new_weights);
    CHECK((a.values() - b.values()).cwiseAbs().maxCoeff() < 1e-10);
  });
}

TEST_CASE("fixed point of the update") {
  prop::for_all(43, [](std::mt19937_64& rng) {
    const std::size_t n = prop::index(rng, 3, 30), d = prop::index(rng, 1, 2);
    const Matrix q = prop::normal_matrix(rng, n, d);
    const WeightVector w(Vector::Constant(static_cast<Eigen::Index>(n), prop::uniform(rng, 0.1, 5.0)));
    const Vector r = compute_update_ratios(q, w, q);
    CHECK((r.array() - 1.0).abs().maxCoeff() < 1e-10);
    const auto s = apply_update(w, r);
    CHECK((s.new_weights.values() - w.values()).cwiseAbs().maxCoeff() < 1e-10 * w.values().maxCoeff());
  });
}

TEST_CASE("weights stay nonnegative under repeated updates") {
  prop::for_all(44, [](std::mt19937_64& rng) {
    const std::size_t n = prop::index(rng, 5, 20);
    const Matrix pred = prop::normal_matrix(rng, n, 2);
    WeightVector w = WeightVector::ones(n);
    for (int step = 0; step < 3; ++step) {
      const std::size_t c = prop::index(rng, 0, 1);
      const Matrix obs = (prop::normal_matrix(rng, n, 1, 0.6).array() + prop::uniform(rng, -0.5, 0.5)).matrix();
      const Matrix pc = pred.col(static_cast<Eigen::Index>(c));
      w = apply_update(normalize_unit_mean(w), compute_update_ratios(pc, normalize_unit_mean(w), obs)).new_weights;
      CHECK(w.values().minCoeff() >= 0.0);
    }
  });
}

TEST_CASE("rejection_sample examples") {
  const auto s = validate_sample_set(Matrix::Zero(3, 1), Matrix::Zero(3, 1));
  CHECK(rejection_sample(s, WeightVector(Vector::Constant(3, 2.5)), 9).size() == 3);
  const auto s2 = validate_sample_set(Matrix::Zero(2, 1), Matrix::Zero(2, 1));
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    CHECK(rejection_sample(s2, WeightVector((Vector(2) << 1.0, 0.0).finished()), seed) == std::vector<std::size_t>{0});
  }
  CHECK(rejection_sample(s, WeightVector(Vector::Ones(3)), 5) == rejection_sample(s, WeightVector(Vector::Ones(3)), 5));
  CHECK_THROWS_AS(rejection_sample(s, WeightVector(Vector::Zero(3)), 1), Error);

  const WeightVector w((Vector(3) << 1.0, 1.0, 2.0).finished());
  std::vector<double> freq(3, 0.0);
  const int trials = 100000;
  for (int t = 0; t < trials; ++t) {
    for (auto i : rejection_sample(s, w, static_cast<std::uint64_t>(t))) freq[i] += 1.0 / trials;
  }
  CHECK(std::abs(freq[0] - 0.5) < 0.01);
  CHECK(std::abs(freq[1] - 0.5) < 0.01);
  CHECK(std::abs(freq[2] - 1.0) < 0.01);
}

TEST_CASE("rejection_sample acceptance counts pass a chi-squared test") {
  const auto s = validate_sample_set(Matrix::Zero(5, 1), Matrix::Zero(5, 1));
  const Vector wv = (Vector(5) << 0.2, 1.0, 0.5, 3.0, 1.7).finished();
  const WeightVector w(wv);
  const double top = wv.maxCoeff();
  const int trials = 100000;
  std::vector<double> count(5, 0.0);
  for (int t = 0; t < trials; ++t) {
    for (auto i : rejection_sample(s, w, 1000003ULL + static_cast<std::uint64_t>(t))) count[i] += 1.0;
  }
  double stat = 0.0;
  double dof = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double p = wv[i] / top;
    if (p >= 1.0) {
      CHECK(count[static_cast<std::size_t>(i)] == trials);
      continue;
    }
    const double e = trials * p;
    stat += (count[static_cast<std::size_t>(i)] - e) * (count[static_cast<std::size_t>(i)] - e) / (e * (1 - p));
    dof += 1.0;
  }
  CHECK(stat < oracle::chi2_quantile(dof, 3.0902));  // upper 1e-3 point
}
