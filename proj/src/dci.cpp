#include "idci/dci.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "idci/error.hpp"

namespace idci {

Vector ratios_from_log_densities(const Vector& log_obs, const Vector& log_pred) {
  if (log_obs.size() != log_pred.size()) throw Error(ErrorCode::LengthMismatch, "log density vectors");
  static const double kMaxLogRatio = std::log(std::numeric_limits<double>::max());
  Vector r(log_obs.size());
  for (Eigen::Index j = 0; j < r.size(); ++j) {
    const double lr = log_obs[j] - log_pred[j];
    if (!std::isfinite(log_pred[j]) || lr >= kMaxLogRatio) {
      if (log_obs[j] == -std::numeric_limits<double>::infinity()) {
        r[j] = 0.0;
        continue;
      }
      throw Error(ErrorCode::PredictedDensityUnderflow,
                  "predicted density vanishes at sample " + std::to_string(j) + " where observed does not",
                  static_cast<std::size_t>(j));
    }
    r[j] = std::exp(lr);
  }
  return r;
}

Vector compute_update_ratios(const Matrix& predicted_qoi, const WeightVector& current_weights,
                             const Matrix& observed_qoi) {
  if (predicted_qoi.cols() != observed_qoi.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "predicted and observed QoI differ in dimension");
  }
  const GaussianKde pred = fit_kde(predicted_qoi, current_weights);
  const GaussianKde obs = fit_kde(observed_qoi);
  return ratios_from_log_densities(obs.log_density(predicted_qoi), pred.log_density(predicted_qoi));
}

DciStepResult apply_update(const WeightVector& current_weights, const Vector& ratios,
                           std::size_t subspace_index) {
  if (static_cast<Eigen::Index>(current_weights.size()) != ratios.size()) {
    throw Error(ErrorCode::LengthMismatch, "weights and ratios differ in length");
  }
  Vector updated = current_weights.values().cwiseProduct(ratios);
  const double diagnostic = updated.mean();
  return DciStepResult{WeightVector(std::move(updated)), diagnostic, subspace_index};
}

DiagnosticStatus check_diagnostic(double diagnostic, double tol) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidValue, "diagnostic tolerance must be > 0");
  return std::abs(diagnostic - 1.0) < tol ? DiagnosticStatus::Pass : DiagnosticStatus::Fail;
}

std::vector<std::size_t> rejection_sample(const SampleSet& samples, const WeightVector& weights,
                                          std::uint64_t rng_seed) {
  if (weights.size() != samples.n()) throw Error(ErrorCode::LengthMismatch, "weights and samples differ in length");
  const double top = weights.values().maxCoeff();
  if (!(top > 0.0)) throw Error(ErrorCode::AllZeroWeights, "cannot rejection-sample with all-zero weights");
  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::size_t> accepted;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double u = unif(rng);
    if (u < weights[i] / top) accepted.push_back(i);
  }
  return accepted;
}

}  // namespace idci
