#include "idci/density.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "idci/error.hpp"

namespace idci {

WeightedMoments weighted_moments(const Matrix& points, const Vector& w) {
  if (points.rows() != w.size()) {
    throw Error(ErrorCode::LengthMismatch, "weights and points differ in length");
  }
  WeightedMoments mom;
  mom.mean = (points.transpose() * w);
  const Matrix centered = points.rowwise() - mom.mean.transpose();
  const double sum_sq = w.squaredNorm();
  mom.effective_size = 1.0 / sum_sq;
  const double denom = 1.0 - sum_sq;
  if (!(denom > 0.0)) {
    throw Error(ErrorCode::DegenerateCovariance, "fewer than two points carry weight");
  }
  mom.covariance = (centered.transpose() * w.asDiagonal() * centered) / denom;
  return mom;
}

BandwidthDiagnosis diagnose_covariance(const Matrix& covariance) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(covariance, Eigen::EigenvaluesOnly);
  const Vector& ev = eig.eigenvalues();
  const double top = ev.maxCoeff();
  BandwidthDiagnosis diag;
  if (!(top > 0.0) || !std::isfinite(top)) {
    diag.status = CovarianceStatus::DegenerateCovariance;
    return diag;
  }
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] / top >= kDegeneracyRatio) ++diag.rank_estimate;
  }
  if (ev.minCoeff() / top < kDegeneracyRatio) diag.status = CovarianceStatus::DegenerateCovariance;
  return diag;
}

Matrix scott_bandwidth(const Matrix& points, const Vector& unit_sum_weights) {
  if (points.rows() < 2) throw Error(ErrorCode::TooFewSamples, "Scott's rule needs m >= 2");
  const WeightedMoments mom = weighted_moments(points, unit_sum_weights);
  const BandwidthDiagnosis diag = diagnose_covariance(mom.covariance);
  if (diag.status == CovarianceStatus::DegenerateCovariance) {
    throw Error(ErrorCode::DegenerateCovariance,
                "data appears to lie in a lower-dimensional subspace (rank " +
                    std::to_string(diag.rank_estimate) + " of " + std::to_string(points.cols()) + ")");
  }
  const double d = static_cast<double>(points.cols());
  return std::pow(mom.effective_size, -2.0 / (d + 4.0)) * mom.covariance;
}

GaussianKde::GaussianKde(Matrix points, Vector weights, Matrix bandwidth)
    : points_(std::move(points)), weights_(std::move(weights)), bandwidth_(std::move(bandwidth)) {
  const Eigen::Index d = points_.cols();
  if (points_.rows() != weights_.size()) {
    throw Error(ErrorCode::LengthMismatch, "weights and points differ in length");
  }
  if (bandwidth_.rows() != d || bandwidth_.cols() != d || d == 0) {
    throw Error(ErrorCode::DimensionMismatch, "bandwidth must be d x d");
  }
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    if (!(weights_[i] >= 0.0) || !std::isfinite(weights_[i])) {
      throw Error(ErrorCode::InvalidValue, "KDE weights must be finite and nonnegative");
    }
  }
  if (!points_.allFinite()) throw Error(ErrorCode::NonFiniteValue, "KDE support points");
  const double total = weights_.sum();
  if (!(total > 0.0)) throw Error(ErrorCode::AllZeroWeights, "KDE weights sum to zero");
  weights_ /= total;

  if (!bandwidth_.isApprox(bandwidth_.transpose(), 1e-12)) {
    throw Error(ErrorCode::NonPositiveDefinite, "bandwidth is not symmetric");
  }
  Eigen::LLT<Matrix> llt(bandwidth_);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NonPositiveDefinite, "bandwidth Cholesky factorization failed");
  }
  chol_ = llt.matrixL();
  double log_det_half = 0.0;
  for (Eigen::Index a = 0; a < d; ++a) log_det_half += std::log(chol_(a, a));
  log_norm_ = -0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi) - log_det_half;

  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    if (weights_[i] > 0.0) active.push_back(i);
  }
  const std::size_t m = active.size();
  Matrix selected(static_cast<Eigen::Index>(m), d);
  log_weights_.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    selected.row(static_cast<Eigen::Index>(k)) = points_.row(active[k]);
    log_weights_[k] = std::log(weights_[active[k]]);
  }
  // Rows of L^{-1} x^T, stored dimension-major.
  const Matrix whitened = chol_.triangularView<Eigen::Lower>().solve(selected.transpose());
  support_.resize(m * static_cast<std::size_t>(d));
  for (Eigen::Index a = 0; a < d; ++a) {
    for (std::size_t k = 0; k < m; ++k) {
      support_[static_cast<std::size_t>(a) * m + k] = whitened(a, static_cast<Eigen::Index>(k));
    }
  }
}

Vector GaussianKde::log_density(const Matrix& query) const {
  const Eigen::Index d = points_.cols();
  if (query.cols() != d) {
    throw Error(ErrorCode::DimensionMismatch, "query has " + std::to_string(query.cols()) +
                                                  " columns, KDE has " + std::to_string(d));
  }
  if (!query.allFinite()) throw Error(ErrorCode::NonFiniteValue, "KDE query points");
  const std::size_t q = static_cast<std::size_t>(query.rows());
  Vector out(query.rows());
  if (q == 0) return out;
  const Matrix whitened = chol_.triangularView<Eigen::Lower>().solve(query.transpose());
  // Column-major d x q is already dimension-major when transposed back.
  const Matrix qt = whitened.transpose();
  detail::log_kernel_sums(support_.data(), log_weights_.data(), log_weights_.size(),
                          static_cast<std::size_t>(d), qt.data(), q, out.data());
  out.array() += log_norm_;
  return out;
}

GaussianKde fit_kde(const Matrix& points, const WeightVector& weights) {
  if (points.rows() != static_cast<Eigen::Index>(weights.size())) {
    throw Error(ErrorCode::LengthMismatch, "weights and points differ in length");
  }
  const double total = weights.values().sum();
  if (!(total > 0.0)) throw Error(ErrorCode::AllZeroWeights, "KDE weights sum to zero");
  const Vector& raw = weights.values();
  // Equal weights take the unweighted path exactly, whatever their scale.
  const bool uniform = raw.size() > 0 && raw.maxCoeff() == raw.minCoeff();
  Vector w = uniform ? Vector::Constant(raw.size(), 1.0 / static_cast<double>(raw.size())) : Vector(raw / total);
  Matrix h = scott_bandwidth(points, w);
  return GaussianKde(points, std::move(w), std::move(h));
}

GaussianKde fit_kde(const Matrix& points) {
  return fit_kde(points, WeightVector::ones(static_cast<std::size_t>(points.rows())));
}

Vector eval_kde(const GaussianKde& kde, const Matrix& query) {
  return kde.log_density(query).array().exp();
}

Box kde_bounding_box(const GaussianKde& kde, double pad_std) {
  Box box;
  const Vector sd = kde.bandwidth().diagonal().array().sqrt();
  box.lower = kde.points().colwise().minCoeff().transpose() - pad_std * sd;
  box.upper = kde.points().colwise().maxCoeff().transpose() + pad_std * sd;
  return box;
}

namespace {
Vector linspace(double lo, double hi, std::size_t count) {
  return Vector::LinSpaced(static_cast<Eigen::Index>(count), lo, hi);
}

double trapezoid_weight(std::size_t i, std::size_t count, double step) {
  return (i == 0 || i + 1 == count) ? 0.5 * step : step;
}
}  // namespace

double kde_mass_check(const GaussianKde& kde, const Box& box, std::size_t grid_per_dim) {
  const std::size_t d = kde.dim();
  if (d > 2) throw Error(ErrorCode::DimensionTooHigh, "mass check supports d <= 2");
  if (grid_per_dim < 2) throw Error(ErrorCode::InvalidArgument, "grid_per_dim must be >= 2");
  if (box.lower.size() != static_cast<Eigen::Index>(d) || box.upper.size() != static_cast<Eigen::Index>(d)) {
    throw Error(ErrorCode::DimensionMismatch, "box dimension");
  }
  const std::size_t g = grid_per_dim;
  std::vector<Vector> axes;
  std::vector<double> steps;
  for (std::size_t a = 0; a < d; ++a) {
    axes.push_back(linspace(box.lower[static_cast<Eigen::Index>(a)], box.upper[static_cast<Eigen::Index>(a)], g));
    steps.push_back((box.upper[static_cast<Eigen::Index>(a)] - box.lower[static_cast<Eigen::Index>(a)]) /
                    static_cast<double>(g - 1));
  }
  if (d == 1) {
    const Vector dens = eval_kde(kde, axes[0]);
    double mass = 0.0;
    for (std::size_t i = 0; i < g; ++i) mass += trapezoid_weight(i, g, steps[0]) * dens[static_cast<Eigen::Index>(i)];
    return mass;
  }
  Matrix grid(static_cast<Eigen::Index>(g * g), 2);
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t j = 0; j < g; ++j) {
      grid(static_cast<Eigen::Index>(i * g + j), 0) = axes[0][static_cast<Eigen::Index>(i)];
      grid(static_cast<Eigen::Index>(i * g + j), 1) = axes[1][static_cast<Eigen::Index>(j)];
    }
  }
  const Vector dens = eval_kde(kde, grid);
  double mass = 0.0;
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t j = 0; j < g; ++j) {
      mass += trapezoid_weight(i, g, steps[0]) * trapezoid_weight(j, g, steps[1]) *
              dens[static_cast<Eigen::Index>(i * g + j)];
    }
  }
  return mass;
}

}  // namespace idci
