#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "idci/density.hpp"
#include "idci/error.hpp"
#include "idci/problems.hpp"
#include "oracles.hpp"
#include "property.hpp"

using namespace idci;

namespace {
Matrix row(std::initializer_list<double> v) {
  Matrix m(1, static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) m(0, i++) = x;
  return m;
}
Matrix col(std::initializer_list<double> v) { return row(v).transpose(); }
}  // namespace

TEST_CASE("scott bandwidth, d=1, unit sample variance") {
  std::mt19937_64 rng(3);
  Matrix x = prop::normal_matrix(rng, 1000, 1);
  const double mean = x.mean();
  x.array() -= mean;
  x /= std::sqrt(x.squaredNorm() / 999.0);
  const Matrix h = scott_bandwidth(x, Vector::Constant(1000, 1e-3));
  CHECK(h(0, 0) == doctest::Approx(std::pow(1000.0, -0.4)).epsilon(1e-12));
  CHECK(h(0, 0) == doctest::Approx(0.06310).epsilon(1e-4));
}

TEST_CASE("scott bandwidth rejects points on a plane") {
  std::mt19937_64 rng(4);
  const Matrix a = prop::normal_matrix(rng, 200, 2);
  Matrix q(200, 3);
  q.col(0) = a.col(0);
  q.col(1) = a.col(1);
  q.col(2) = -a.col(0) + a.col(1);
  try {
    scott_bandwidth(q, Vector::Constant(200, 1.0 / 200));
    FAIL("expected DegenerateCovariance");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateCovariance);
  }
  CHECK(diagnose_covariance(oracle::weighted_cov(q, Vector::Ones(200))).status == CovarianceStatus::DegenerateCovariance);
  CHECK(diagnose_covariance(oracle::weighted_cov(q, Vector::Ones(200))).rank_estimate == 2);
}

TEST_CASE("fit_kde small examples") {
  const Matrix pts = col({-1.0, 1.0});
  const GaussianKde k = fit_kde(pts);
  const Matrix h = k.bandwidth();
  const double s = std::sqrt(h(0, 0));
  auto phi = [&](double z, double mu) { return std::exp(-0.5 * (z - mu) * (z - mu) / (s * s)) / (s * std::sqrt(2 * std::numbers::pi)); };
  const Vector v = eval_kde(k, col({0.3}));
  CHECK(v[0] == doctest::Approx(0.5 * phi(0.3, -1) + 0.5 * phi(0.3, 1)).epsilon(1e-12));

  // Zero weight point contributes nothing.
  const GaussianKde one(pts, (Vector(2) << 1.0, 0.0).finished(), Matrix::Identity(1, 1));
  CHECK(eval_kde(one, col({0.5}))[0] ==
        doctest::Approx(std::exp(-0.5 * 2.25) / std::sqrt(2 * std::numbers::pi)).epsilon(1e-12));
}

TEST_CASE("eval_kde examples") {
  const GaussianKde k(col({0.0}), Vector::Ones(1), Matrix::Identity(1, 1));
  CHECK(eval_kde(k, col({0.0}))[0] == doctest::Approx(1.0 / std::sqrt(2 * std::numbers::pi)).epsilon(1e-14));
  CHECK(eval_kde(k, col({0.0}))[0] == doctest::Approx(0.39894).epsilon(1e-5));

  const Vector far = eval_kde(k, col({45.0, 1e3, -1e6}));
  for (Eigen::Index i = 0; i < far.size(); ++i) {
    CHECK(std::isfinite(far[i]));
    CHECK(far[i] >= 0.0);
    CHECK(far[i] < 1e-300);
  }
  const Vector lf = k.log_density(col({1e3}));
  CHECK(std::isfinite(lf[0]));

  const GaussianKde two(col({-2.0, 2.0}), Vector::Ones(2), Matrix::Identity(1, 1));
  const GaussianKde left(col({-2.0}), Vector::Ones(1), Matrix::Identity(1, 1));
  CHECK(eval_kde(two, col({0.0}))[0] == doctest::Approx(eval_kde(left, col({0.0}))[0]).epsilon(1e-14));

  try {
    eval_kde(two, row({0.0, 1.0}));
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("kde rejects non positive definite bandwidth and bad weights") {
  Matrix h(2, 2);
  h << 1, 2, 2, 1;
  try {
    GaussianKde(Matrix::Zero(2, 2), Vector::Ones(2), h);
    FAIL("expected NonPositiveDefinite");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonPositiveDefinite);
  }
  try {
    fit_kde(col({0.0, 1.0}), WeightVector(Vector::Zero(2)));
    FAIL("expected AllZeroWeights");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AllZeroWeights);
  }
}

TEST_CASE("kde_mass_check examples") {
  const GaussianKde k(col({0.0}), Vector::Ones(1), Matrix::Identity(1, 1));
  Box box{Vector::Constant(1, -8.0), Vector::Constant(1, 8.0)};
  CHECK(std::abs(kde_mass_check(k, box, 2001) - 1.0) < 1e-6);

  const auto g = gen_linear2d(1000, 0, Linear2dVariant::TwoQoI);
  const GaussianKde q1 = fit_kde(select_columns(g.predicted.qoi(), {0}));
  CHECK(std::abs(kde_mass_check(q1, kde_bounding_box(q1, 6.0), 2001) - 1.0) < 1e-3);

  const GaussianKde k3(Matrix::Zero(1, 3), Vector::Ones(1), Matrix::Identity(3, 3));
  try {
    kde_mass_check(k3, Box{Vector::Constant(3, -1), Vector::Constant(3, 1)}, 5);
    FAIL("expected DimensionTooHigh");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionTooHigh);
  }
}

TEST_CASE("weighted moments and scott rule against the direct formula") {
  prop::for_all(21, [](std::mt19937_64& rng) {
    const std::size_t n = prop::index(rng, 5, 40), d = prop::index(rng, 1, 3);
    const Matrix x = prop::normal_matrix(rng, n, d, prop::uniform(rng, 0.2, 5.0));
    const Vector w = prop::positive_vector(rng, n);
    const Vector wn = w / w.sum();
    const auto mom = weighted_moments(x, wn);
    const Matrix c = oracle::weighted_cov(x, w);
    CHECK((mom.covariance - c).cwiseAbs().maxCoeff() <= 1e-10 * c.cwiseAbs().maxCoeff());
    CHECK(mom.effective_size == doctest::Approx(1.0 / wn.squaredNorm()).epsilon(1e-12));
    const Matrix h = scott_bandwidth(x, wn);
    const Matrix ho = oracle::scott(x, w);
    CHECK((h - ho).cwiseAbs().maxCoeff() <= 1e-10 * ho.cwiseAbs().maxCoeff());
  });
}

TEST_CASE("uniform weights reproduce the unweighted scott rule") {
  prop::for_all(22, [](std::mt19937_64& rng) {
    const std::size_t n = prop::index(rng, 5, 40), d = prop::index(rng, 1, 3);
    const Matrix x = prop::normal_matrix(rng, n, d);
    const Matrix a = scott_bandwidth(x, Vector::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n)));
    const Matrix cov = oracle::weighted_cov(x, Vector::Ones(static_cast<Eigen::Index>(n)));
    const Matrix b = std::pow(static_cast<double>(n), -2.0 / (static_cast<double>(d) + 4.0)) * cov;
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-10 * b.cwiseAbs().maxCoeff());
  });
}

TEST_CASE("kde evaluation matches the textbook mixture") {
  prop::for_all(23, [](std::mt19937_64& rng) {
    const std::size_t d = prop::index(rng, 1, 3), n = prop::index(rng, 5 * d + 5, 40);
    const Matrix x = prop::normal_matrix(rng, n, d);
    const Vector w = prop::positive_vector(rng, n);
    const GaussianKde k = fit_kde(x, WeightVector(w));
    const Matrix h = oracle::scott(x, w);
    const Matrix q = prop::normal_matrix(rng, 3, d, 1.5);
    const Vector lv = k.log_density(q);
    const Vector v = eval_kde(k, q);
    for (Eigen::Index j = 0; j < q.rows(); ++j) {
      const Vector qj = q.row(j).transpose();
      CHECK(std::abs(lv[j] - oracle::log_kde(x, w, h, qj)) <= 1e-10);
      const double o = oracle::kde(x, w, h, qj);
      if (o > 1e-290) CHECK(std::abs(v[j] - o) <= 1e-10 * o);
    }
  });
}

TEST_CASE("uniform-weight fit equals unweighted fit") {
  prop::for_all(24, [](std::mt19937_64& rng) {
    const std::size_t n = prop::index(rng, 4, 30), d = prop::index(rng, 1, 2);
    const Matrix x = prop::normal_matrix(rng, n, d);
    const Matrix q = prop::normal_matrix(rng, 4, d);
    const double c = prop::uniform(rng, 0.1, 10.0);
    const Vector a = eval_kde(fit_kde(x), q);
    const Vector b = eval_kde(fit_kde(x, WeightVector(Vector::Constant(static_cast<Eigen::Index>(n), c))), q);
    for (Eigen::Index j = 0; j < q.rows(); ++j) CHECK(std::abs(a[j] - b[j]) <= 1e-14 * a[j]);
  });
}

TEST_CASE("kde is permutation invariant in its support") {
  prop::for_all(25, [](std::mt19937_64& rng) {
    const std::size_t n = prop::index(rng, 4, 30), d = prop::index(rng, 1, 2);
    const Matrix x = prop::normal_matrix(rng, n, d);
    const Vector w = prop::positive_vector(rng, n);
    std::vector<Eigen::Index> perm(n);
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix xp(x.rows(), x.cols());
    Vector wp(w.size());
    for (std::size_t i = 0; i < n; ++i) {
      xp.row(static_cast<Eigen::Index>(i)) = x.row(perm[i]);
      wp[static_cast<Eigen::Index>(i)] = w[perm[i]];
    }
    const Matrix q = prop::normal_matrix(rng, 4, d);
    const Vector a = fit_kde(x, WeightVector(w)).log_density(q);
    const Vector b = fit_kde(xp, WeightVector(wp)).log_density(q);
    for (Eigen::Index j = 0; j < q.rows(); ++j) CHECK(std::abs(a[j] - b[j]) <= 1e-12 * std::max(1.0, std::abs(a[j])));
  });
}

TEST_CASE("scott bandwidth scales quadratically") {
  prop::for_all(26, [](std::mt19937_64& rng) {
    const std::size_t n = prop::index(rng, 5, 40), d = prop::index(rng, 1, 3);
    const Matrix x = prop::normal_matrix(rng, n, d);
    const Vector w = prop::positive_vector(rng, n);
    const double c = std::exp(prop::uniform(rng, -3, 3));
    const Matrix a = scott_bandwidth(x, w / w.sum());
    const Matrix b = scott_bandwidth(c * x, w / w.sum());
    CHECK((b - c * c * a).cwiseAbs().maxCoeff() <= 1e-10 * (c * c * a).cwiseAbs().maxCoeff());
  });
}

TEST_CASE("kde integrates to one in one and two dimensions") {
  prop::for_all(27, [](std::mt19937_64& rng) {
    const std::size_t n = prop::index(rng, 5, 20), d = prop::index(rng, 1, 2);
    const Matrix x = prop::normal_matrix(rng, n, d, prop::uniform(rng, 0.5, 3.0));
    const GaussianKde k = fit_kde(x, WeightVector(prop::positive_vector(rng, n)));
    const std::size_t grid = d == 1 ? 801 : 121;
    CHECK(std::abs(kde_mass_check(k, kde_bounding_box(k, 7.0), grid) - 1.0) < 1e-3);
  });
}
