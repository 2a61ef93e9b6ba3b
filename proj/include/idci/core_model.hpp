#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace idci {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Parameter samples and their QoI evaluations; row i of `params` and row i
/// of `qoi` describe the same sample. Construct through validate_sample_set.
class SampleSet {
 public:
  const Matrix& params() const noexcept { return params_; }
  const Matrix& qoi() const noexcept { return qoi_; }
  std::size_t n() const noexcept { return static_cast<std::size_t>(qoi_.rows()); }
  std::size_t p() const noexcept { return static_cast<std::size_t>(params_.cols()); }
  std::size_t d() const noexcept { return static_cast<std::size_t>(qoi_.cols()); }

 private:
  SampleSet(Matrix params, Matrix qoi) : params_(std::move(params)), qoi_(std::move(qoi)) {}
  friend SampleSet validate_sample_set(Matrix raw_params, Matrix raw_qoi);

  Matrix params_;
  Matrix qoi_;
};

SampleSet validate_sample_set(Matrix raw_params, Matrix raw_qoi);

/// Nonnegative per-sample r-values.
class WeightVector {
 public:
  explicit WeightVector(Vector w);
  static WeightVector ones(std::size_t n) { return WeightVector(Vector::Ones(static_cast<Eigen::Index>(n))); }

  const Vector& values() const noexcept { return w_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(w_.size()); }
  double operator[](std::size_t i) const { return w_[static_cast<Eigen::Index>(i)]; }
  double mean() const { return w_.mean(); }

 private:
  Vector w_;
};

WeightVector normalize_unit_mean(const WeightVector& w);

/// Ordered column groups phi_1..phi_k into the QoI matrix. Groups may share
/// columns; order is the iteration order within an epoch.
class SubspacePartition {
 public:
  SubspacePartition(std::vector<std::vector<std::size_t>> groups, std::size_t qoi_dim);

  static SubspacePartition singletons(std::size_t qoi_dim);

  const std::vector<std::vector<std::size_t>>& groups() const noexcept { return groups_; }
  const std::vector<std::size_t>& group(std::size_t i) const { return groups_.at(i); }
  std::size_t k() const noexcept { return groups_.size(); }
  std::size_t qoi_dim() const noexcept { return qoi_dim_; }

  friend bool operator==(const SubspacePartition&, const SubspacePartition&) = default;

 private:
  std::vector<std::vector<std::size_t>> groups_;
  std::size_t qoi_dim_;
};

/// Copy of the listed columns of `m`, in the listed order.
Matrix select_columns(const Matrix& m, const std::vector<std::size_t>& cols);

enum class BandwidthRule { Scott };
/// Stopping-rule KL between observed and push-forward KDEs, both evaluated
/// at the observed samples: the plain log-ratio average, or the discrete KL
/// of the two evaluations normalized over the points.
enum class KlEstimator { ObservedSampleAverage, NormalizedObservedPoints };
enum class Scaling { None, StandardScale };

struct RunConfig {
  double diag_tol = 0.1;
  double abs_kl_tol = 0.0;  // required, no default
  double rel_kl_tol = 1e-2;
  std::size_t max_epochs = 100;
  BandwidthRule bandwidth_rule = BandwidthRule::Scott;
  KlEstimator kl_estimator = KlEstimator::NormalizedObservedPoints;
  Scaling scaling = Scaling::None;
  std::uint64_t seed = 0;
  // Plot-export settings; the final epoch is always snapshotted.
  std::vector<std::size_t> snapshot_epochs = {1, 5};
  std::size_t grid_per_dim = 101;

  /// Throws InvalidValue naming the first offending field.
  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

enum class TerminationKind { DiagnosticViolated, AbsKlReached, RelKlReached, MaxEpochs };

struct TerminationReason {
  TerminationKind kind = TerminationKind::MaxEpochs;
  std::size_t epoch = 0;                    // epoch in which the run stopped
  std::optional<std::size_t> subspace;      // set for DiagnosticViolated

  friend bool operator==(const TerminationReason&, const TerminationReason&) = default;
};

std::string to_string(TerminationKind kind);
std::optional<TerminationKind> termination_from_string(const std::string& s);

struct IterationRecord {
  std::size_t epoch = 0;           // 1-based
  std::size_t subspace_index = 0;  // 0-based
  double diagnostic_value = 0.0;
  /// KL(observed || push-forward) on this subspace with the updated weights.
  double kl_after_update = 0.0;
  /// Per-subspace KL with epoch-final weights; filled on the last iteration
  /// of each completed epoch, empty otherwise.
  std::vector<double> per_subspace_kl_after_epoch;

  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

struct RunReport {
  TerminationReason termination;
  std::size_t epochs_run = 0;
  std::vector<IterationRecord> per_iteration;
  Vector final_weights;
  RunConfig config;
  /// max over the last completed epoch of |epoch-end KL - kl_after_update|
  /// per subspace: how far the rest of an epoch pushes a subspace off the
  /// fit its own update left. Zero at a fixed point, positive in a limit cycle.
  double limit_cycle_amplitude = 0.0;

  /// KL vectors of every completed epoch, in order.
  std::vector<std::vector<double>> epoch_kls() const;

  friend bool operator==(const RunReport& a, const RunReport& b) {
    return a.termination == b.termination && a.epochs_run == b.epochs_run &&
           a.per_iteration == b.per_iteration &&
           a.final_weights.size() == b.final_weights.size() && a.final_weights == b.final_weights &&
           a.config == b.config && a.limit_cycle_amplitude == b.limit_cycle_amplitude;
  }
};

struct ScaledColumns {
  Matrix scaled;
  Vector means;
  Vector stds;
};

/// Column-wise standardization with the n-1 standard deviation.
ScaledColumns standard_scale(const Matrix& columns);
/// Applies recorded means/stds to other data with the same columns.
Matrix apply_scaling(const Matrix& columns, const Vector& means, const Vector& stds);
Matrix invert_scaling(const Matrix& scaled, const Vector& means, const Vector& stds);

}  // namespace idci
