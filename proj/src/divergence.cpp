#include "idci/divergence.hpp"

#include <cmath>

#include "idci/error.hpp"

namespace idci {

double f_generator(FDivergenceKind kind, double t) {
  switch (kind) {
    case FDivergenceKind::KL: return t > 0.0 ? t * std::log(t) : 0.0;
    case FDivergenceKind::TotalVariation: return 0.5 * std::abs(t - 1.0);
    case FDivergenceKind::ChiSquared: return (t - 1.0) * (t - 1.0);
  }
  return 0.0;
}

namespace {
void require_normalized(std::span<const double> v, const char* name) {
  double sum = 0.0;
  for (double x : v) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw Error(ErrorCode::NotNormalized, std::string(name) + " has a negative or non-finite entry");
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-10) {
    throw Error(ErrorCode::NotNormalized, std::string(name) + " sums to " + std::to_string(sum));
  }
}
}  // namespace

double f_divergence_discrete(std::span<const double> p, std::span<const double> q, FDivergenceKind kind) {
  if (p.size() != q.size()) throw Error(ErrorCode::LengthMismatch, "p and q differ in length");
  require_normalized(p, "p");
  require_normalized(q, "q");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (q[i] == 0.0) {
      if (p[i] == 0.0) continue;
      if (kind == FDivergenceKind::TotalVariation) {
        total += 0.5 * p[i];
        continue;
      }
      throw Error(ErrorCode::AbsoluteContinuityViolated,
                  "p_" + std::to_string(i) + " > 0 where q_" + std::to_string(i) + " = 0", i);
    }
    switch (kind) {
      case FDivergenceKind::KL:
        if (p[i] > 0.0) total += p[i] * std::log(p[i] / q[i]);
        break;
      case FDivergenceKind::TotalVariation:
        total += 0.5 * std::abs(p[i] - q[i]);
        break;
      case FDivergenceKind::ChiSquared: {
        const double diff = p[i] - q[i];
        total += diff * diff / q[i];
        break;
      }
    }
  }
  return total;
}

double kl_from_log_densities(const Vector& log_p, const Vector& log_q) {
  if (log_p.size() != log_q.size()) throw Error(ErrorCode::LengthMismatch, "log density vectors");
  if (log_p.size() == 0) throw Error(ErrorCode::InvalidArgument, "no evaluation points");
  for (Eigen::Index j = 0; j < log_q.size(); ++j) {
    if (!std::isfinite(log_q[j])) {
      throw Error(ErrorCode::ZeroDensityAtEvalPoint, "q density vanishes at evaluation point " + std::to_string(j),
                  static_cast<std::size_t>(j));
    }
  }
  return (log_p - log_q).mean();
}

double kl_normalized_points(const Vector& log_p, const Vector& log_q) {
  if (log_p.size() != log_q.size()) throw Error(ErrorCode::LengthMismatch, "log density vectors");
  if (log_p.size() == 0) throw Error(ErrorCode::InvalidArgument, "no evaluation points");
  for (Eigen::Index j = 0; j < log_q.size(); ++j) {
    if (!std::isfinite(log_q[j])) {
      throw Error(ErrorCode::ZeroDensityAtEvalPoint, "q density vanishes at evaluation point " + std::to_string(j),
                  static_cast<std::size_t>(j));
    }
  }
  auto log_sum_exp = [](const Vector& v) {
    const double top = v.maxCoeff();
    return top + std::log((v.array() - top).exp().sum());
  };
  const Vector lp = log_p.array() - log_sum_exp(log_p);
  const Vector lq = log_q.array() - log_sum_exp(log_q);
  const double kl = (lp.array().exp() * (lp - lq).array()).sum();
  return kl < 0.0 ? 0.0 : kl;
}

double kl_estimate(KlEstimator estimator, const Vector& log_p, const Vector& log_q) {
  switch (estimator) {
    case KlEstimator::ObservedSampleAverage: return kl_from_log_densities(log_p, log_q);
    case KlEstimator::NormalizedObservedPoints: return kl_normalized_points(log_p, log_q);
  }
  return kl_from_log_densities(log_p, log_q);
}

double kl_between_kdes(const GaussianKde& p_kde, const GaussianKde& q_kde, const Matrix& eval_points) {
  if (&p_kde == &q_kde) {
    if (eval_points.rows() == 0) throw Error(ErrorCode::InvalidArgument, "no evaluation points");
    return 0.0;
  }
  return kl_from_log_densities(p_kde.log_density(eval_points), q_kde.log_density(eval_points));
}

double gaussian_kl_closed_form(const Vector& mu0, const Matrix& cov0, const Vector& mu1, const Matrix& cov1) {
  const Eigen::Index d = mu0.size();
  if (mu1.size() != d || cov0.rows() != d || cov0.cols() != d || cov1.rows() != d || cov1.cols() != d) {
    throw Error(ErrorCode::DimensionMismatch, "Gaussian parameters differ in dimension");
  }
  Eigen::LLT<Matrix> l0(cov0);
  Eigen::LLT<Matrix> l1(cov1);
  if (l0.info() != Eigen::Success || l1.info() != Eigen::Success) {
    throw Error(ErrorCode::NonPositiveDefinite, "covariance is not positive definite");
  }
  const Matrix inv1_cov0 = l1.solve(cov0);
  const Vector diff = mu1 - mu0;
  const double maha = diff.dot(l1.solve(diff));
  double logdet0 = 0.0;
  double logdet1 = 0.0;
  const Matrix L0 = l0.matrixL();
  const Matrix L1 = l1.matrixL();
  for (Eigen::Index a = 0; a < d; ++a) {
    logdet0 += 2.0 * std::log(L0(a, a));
    logdet1 += 2.0 * std::log(L1(a, a));
  }
  const double kl = 0.5 * (inv1_cov0.trace() + maha - static_cast<double>(d) + logdet1 - logdet0);
  return kl < 0.0 ? 0.0 : kl;
}

}  // namespace idci
