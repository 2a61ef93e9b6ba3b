#pragma once

#include <span>

#include "idci/core_model.hpp"
#include "idci/density.hpp"

namespace idci {

enum class FDivergenceKind { KL, TotalVariation, ChiSquared };

/// Generator f of the divergence; convex with f(1) = 0.
double f_generator(FDivergenceKind kind, double t);

/// D_f(p || q) = sum_i q_i f(p_i / q_i) with 0 f(0/0) := 0 on probability
/// vectors. Total variation treats q_i = 0 < p_i by its limit |p_i - q_i|/2.
double f_divergence_discrete(std::span<const double> p, std::span<const double> q, FDivergenceKind kind);

/// KL(p || q) estimated as the mean of log p(x) - log q(x) over the rows of
/// `eval_points`, which should be samples of p. May come out slightly
/// negative; the value is returned unclamped.
double kl_between_kdes(const GaussianKde& p_kde, const GaussianKde& q_kde, const Matrix& eval_points);

/// Sample-average KL from precomputed log densities at the evaluation points.
double kl_from_log_densities(const Vector& log_p, const Vector& log_q);

/// Discrete KL between the two density evaluations at the same points, each
/// normalized to sum 1 over the points. Nonnegative; insensitive to a common
/// multiplicative offset such as the self-kernel term of a KDE evaluated at
/// its own support.
double kl_normalized_points(const Vector& log_p, const Vector& log_q);

/// Dispatches on the configured stopping-rule estimator.
double kl_estimate(KlEstimator estimator, const Vector& log_p, const Vector& log_q);

/// Closed-form KL(N(mu0, cov0) || N(mu1, cov1)).
double gaussian_kl_closed_form(const Vector& mu0, const Matrix& cov0, const Vector& mu1, const Matrix& cov1);

}  // namespace idci
