#pragma once

#include <cstdint>
#include <vector>

#include "idci/core_model.hpp"
#include "idci/density.hpp"

namespace idci {

struct DciStepResult {
  WeightVector new_weights;
  double diagnostic = 0.0;  // mean of new_weights before renormalization
  std::size_t subspace_index = 0;
};

/// ratio_j = exp(log_obs_j - log_pred_j). Throws PredictedDensityUnderflow
/// at the first j where the predicted density is negligible against the
/// observed one (ratio not representable).
Vector ratios_from_log_densities(const Vector& log_obs, const Vector& log_pred);

/// r-values on one subspace: observed KDE over predicted KDE (fit with
/// `current_weights`), both evaluated at the predicted QoI points.
Vector compute_update_ratios(const Matrix& predicted_qoi, const WeightVector& current_weights,
                             const Matrix& observed_qoi);

DciStepResult apply_update(const WeightVector& current_weights, const Vector& ratios,
                           std::size_t subspace_index = 0);

enum class DiagnosticStatus { Pass, Fail };

DiagnosticStatus check_diagnostic(double diagnostic, double tol);

/// Accepts row i with probability w_i / max_j w_j.
std::vector<std::size_t> rejection_sample(const SampleSet& samples, const WeightVector& weights,
                                          std::uint64_t rng_seed);

}  // namespace idci
