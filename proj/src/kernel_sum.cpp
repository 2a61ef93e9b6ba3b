// Built with -ffast-math -fno-associative-math so the loops vectorize while
// the two-step range reduction below is kept as written. Callers guarantee
// finite inputs.
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <cstring>
#include <limits>
#include <vector>

#include "idci/density.hpp"

namespace idci::detail {

namespace {

// Below this the single-pass sum may have lost terms to underflow.
constexpr double kUnderflowGuard = 1e-250;

// exp for x <= 0, inlined so the loops vectorize without library calls.
// Relative error below 1e-15 over [-708, 0]; smaller inputs clamp.
inline double exp_nonpositive(double x) {
  x = x < -708.0 ? -708.0 : x;
  const double k = std::floor(x * 1.4426950408889634 + 0.5);
  const auto ki = static_cast<std::int64_t>(k);
  const double r = (x - k * 6.93147180369123816490e-01) - k * 1.90821492927058770002e-10;
  double p = 1.0 / 479001600.0;
  p = p * r + 1.0 / 39916800.0;
  p = p * r + 1.0 / 3628800.0;
  p = p * r + 1.0 / 362880.0;
  p = p * r + 1.0 / 40320.0;
  p = p * r + 1.0 / 5040.0;
  p = p * r + 1.0 / 720.0;
  p = p * r + 1.0 / 120.0;
  p = p * r + 1.0 / 24.0;
  p = p * r + 1.0 / 6.0;
  p = p * r + 0.5;
  p = p * r + 1.0;
  p = p * r + 1.0;
  const std::int64_t bits = (ki + 1023) << 52;
  double scale;
  std::memcpy(&scale, &bits, sizeof scale);
  return p * scale;
}

double shifted_sum(const double* support, const double* shifted_w, std::size_t m, std::size_t dim,
                   const double* query, std::size_t q, std::size_t j) {
  double sum = 0.0;
  if (dim == 1) {
    const double x = query[j];
#pragma omp simd reduction(+ : sum)
    for (std::size_t i = 0; i < m; ++i) {
      const double z = support[i] - x;
      sum += exp_nonpositive(shifted_w[i] - 0.5 * z * z);
    }
  } else if (dim == 2) {
    const double x0 = query[j], x1 = query[q + j];
    const double* s1 = support + m;
#pragma omp simd reduction(+ : sum)
    for (std::size_t i = 0; i < m; ++i) {
      const double z0 = support[i] - x0, z1 = s1[i] - x1;
      sum += exp_nonpositive(shifted_w[i] - 0.5 * (z0 * z0 + z1 * z1));
    }
  } else {
    return 0.0;
  }
  return sum;
}

double exact_log_sum(const double* support, const double* log_w, std::size_t m, std::size_t dim,
                     const double* query, std::size_t q, std::size_t j, std::vector<double>& t) {
  double* tp = t.data();
  for (std::size_t i = 0; i < m; ++i) tp[i] = log_w[i];
  for (std::size_t a = 0; a < dim; ++a) {
    const double x = query[a * q + j];
    const double* s = support + a * m;
    for (std::size_t i = 0; i < m; ++i) {
      const double z = s[i] - x;
      tp[i] -= 0.5 * z * z;
    }
  }
  double peak = -std::numeric_limits<double>::max();
  for (std::size_t i = 0; i < m; ++i) peak = std::max(peak, tp[i]);
  double sum = 0.0;
#pragma omp simd reduction(+ : sum)
  for (std::size_t i = 0; i < m; ++i) sum += exp_nonpositive(tp[i] - peak);
  return peak + std::log(sum);
}

}  // namespace

void log_kernel_sums(const double* support, const double* log_w, std::size_t m, std::size_t dim,
                     const double* query, std::size_t q, double* out) {
  // Shifting by the largest log-weight bounds every term by one, so a single
  // pass suffices unless the query sits far from all support points.
  const double shift = m ? *std::max_element(log_w, log_w + m) : 0.0;
  std::vector<double> shifted(m);
  for (std::size_t i = 0; i < m; ++i) shifted[i] = log_w[i] - shift;
  const auto nq = static_cast<std::ptrdiff_t>(q);
#pragma omp parallel if (q * m > 1000000)
  {
    std::vector<double> t(m);
#pragma omp for schedule(static)
    for (std::ptrdiff_t jj = 0; jj < nq; ++jj) {
      const auto j = static_cast<std::size_t>(jj);
      const double sum = shifted_sum(support, shifted.data(), m, dim, query, q, j);
      out[j] = sum > kUnderflowGuard ? shift + std::log(sum) : exact_log_sum(support, log_w, m, dim, query, q, j, t);
    }
  }
}

}  // namespace idci::detail
