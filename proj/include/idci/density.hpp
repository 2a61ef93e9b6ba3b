#pragma once

#include <cstddef>
#include <vector>

#include "idci/core_model.hpp"

namespace idci {

enum class CovarianceStatus { Ok, DegenerateCovariance };

struct BandwidthDiagnosis {
  CovarianceStatus status = CovarianceStatus::Ok;
  std::size_t rank_estimate = 0;
};

/// Smallest/largest eigenvalue ratio below which a covariance is singular.
inline constexpr double kDegeneracyRatio = 1e-10;

/// Weighted mean and reliability-weighted covariance (divisor 1 - sum w^2,
/// which is n-1 scaled for uniform weights). Weights must sum to 1.
struct WeightedMoments {
  Vector mean;
  Matrix covariance;
  double effective_size = 0.0;  // (sum w)^2 / sum w^2
};

WeightedMoments weighted_moments(const Matrix& points, const Vector& unit_sum_weights);

BandwidthDiagnosis diagnose_covariance(const Matrix& covariance);

/// Scott's rule H = n_eff^(-2/(d+4)) * Sigma_w. Throws DegenerateCovariance
/// when Sigma_w is numerically singular; never regularizes.
Matrix scott_bandwidth(const Matrix& points, const Vector& unit_sum_weights);

/// Weighted Gaussian mixture sum_i w_i N(x; points_i, H). Immutable; all
/// evaluation members are const and safe to call concurrently.
class GaussianKde {
 public:
  /// Explicit bandwidth. Weights are renormalized to sum 1.
  GaussianKde(Matrix points, Vector weights, Matrix bandwidth);

  const Matrix& points() const noexcept { return points_; }
  const Vector& weights() const noexcept { return weights_; }
  const Matrix& bandwidth() const noexcept { return bandwidth_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(points_.cols()); }

  /// Log density at each query row, accumulated in log space with a max
  /// shift so far-away queries stay finite.
  Vector log_density(const Matrix& query) const;

 private:
  Matrix points_;
  Vector weights_;
  Matrix bandwidth_;
  // Whitened support of the positive-weight points, dimension-major.
  Matrix chol_;  // lower factor L, H = L L^T
  std::vector<double> support_;
  std::vector<double> log_weights_;
  double log_norm_ = 0.0;
};

/// Scott-rule KDE on `points` with the given (normalizable) weights.
GaussianKde fit_kde(const Matrix& points, const WeightVector& weights);
/// Unweighted Scott-rule KDE.
GaussianKde fit_kde(const Matrix& points);

Vector eval_kde(const GaussianKde& kde, const Matrix& query);

struct Box {
  Vector lower;
  Vector upper;
};

/// Range of the support points padded by `pad_std` kernel standard deviations.
Box kde_bounding_box(const GaussianKde& kde, double pad_std);

/// Trapezoidal mass of the KDE over `box` (d <= 2 only).
double kde_mass_check(const GaussianKde& kde, const Box& box, std::size_t grid_per_dim);

namespace detail {
/// out[j] = log sum_i exp(log_w[i] - 0.5 * |support_i - query_j|^2); both
/// arrays dimension-major (value of dim a for point i at a*count + i).
/// All inputs must be finite.
void log_kernel_sums(const double* support, const double* log_w, std::size_t m, std::size_t dim,
                     const double* query, std::size_t q, double* out);
}  // namespace detail

}  // namespace idci
