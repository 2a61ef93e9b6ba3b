#include "idci/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "idci/error.hpp"

namespace idci {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Independent streams per (seed, purpose).
std::mt19937_64 make_rng(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
  return std::mt19937_64(seq);
}

enum Stream : std::uint32_t { kInit = 1, kDataGen = 2, kSurrogate = 3, kPermute = 4 };

double sample_beta(std::mt19937_64& rng, double alpha, double beta) {
  std::gamma_distribution<double> ga(alpha, 1.0);
  std::gamma_distribution<double> gb(beta, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  return x / (x + y);
}

}  // namespace

std::size_t ProblemSpec::qoi_dim() const {
  std::size_t d = 0;
  for (const auto& m : qoi_maps) d += static_cast<std::size_t>(m.a.rows());
  return d;
}

void ProblemSpec::validate() const {
  if (p == 0) throw Error(ErrorCode::DimensionMismatch, name + ": p must be positive");
  if (qoi_maps.empty()) throw Error(ErrorCode::InvalidArgument, name + ": no QoI maps");
  for (const auto& m : qoi_maps) {
    if (static_cast<std::size_t>(m.a.cols()) != p || m.b.size() != m.a.rows()) {
      throw Error(ErrorCode::DimensionMismatch, name + ": QoI map shape disagrees with p");
    }
  }
  const std::size_t init_p = std::visit(
      Overloaded{[](const UniformBox& b) { return static_cast<std::size_t>(b.lower.size()); },
                 [](const StdNormal& s) { return s.p; }},
      init_sampler);
  const std::size_t dg_p = std::visit(
      Overloaded{[](const IndepBeta& b) { return b.shapes.size(); },
                 [](const Normal& nm) { return static_cast<std::size_t>(nm.mean.size()); }},
      dg_sampler);
  if (init_p != p || dg_p != p) throw Error(ErrorCode::DimensionMismatch, name + ": sampler dimension disagrees with p");
}

Matrix evaluate_qoi(const ProblemSpec& spec, const Matrix& params) {
  if (static_cast<std::size_t>(params.cols()) != spec.p) {
    throw Error(ErrorCode::DimensionMismatch, "parameter columns disagree with p");
  }
  Matrix q(params.rows(), static_cast<Eigen::Index>(spec.qoi_dim()));
  Eigen::Index col = 0;
  for (const auto& m : spec.qoi_maps) {
    q.middleCols(col, m.a.rows()) = (params * m.a.transpose()).rowwise() + m.b.transpose();
    col += m.a.rows();
  }
  return q;
}

Matrix sample_init(const InitSampler& sampler, std::size_t n, std::uint64_t seed) {
  auto rng = make_rng(seed, kInit);
  return std::visit(
      Overloaded{[&](const UniformBox& box) {
                   Matrix out(static_cast<Eigen::Index>(n), box.lower.size());
                   for (Eigen::Index r = 0; r < out.rows(); ++r) {
                     for (Eigen::Index c = 0; c < out.cols(); ++c) {
                       std::uniform_real_distribution<double> u(box.lower[c], box.upper[c]);
                       out(r, c) = u(rng);
                     }
                   }
                   return out;
                 },
                 [&](const StdNormal& s) {
                   std::normal_distribution<double> z(0.0, 1.0);
                   Matrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(s.p));
                   for (Eigen::Index r = 0; r < out.rows(); ++r) {
                     for (Eigen::Index c = 0; c < out.cols(); ++c) out(r, c) = z(rng);
                   }
                   return out;
                 }},
      sampler);
}

Matrix sample_data_generating(const DataGenSampler& sampler, std::size_t n, std::uint64_t seed) {
  auto rng = make_rng(seed, kDataGen);
  return std::visit(
      Overloaded{[&](const IndepBeta& b) {
                   Matrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(b.shapes.size()));
                   for (Eigen::Index r = 0; r < out.rows(); ++r) {
                     for (Eigen::Index c = 0; c < out.cols(); ++c) {
                       const auto [alpha, beta] = b.shapes[static_cast<std::size_t>(c)];
                       const double x = sample_beta(rng, alpha, beta);
                       out(r, c) = b.box.lower[c] + (b.box.upper[c] - b.box.lower[c]) * x;
                     }
                   }
                   return out;
                 },
                 [&](const Normal& nm) {
                   std::normal_distribution<double> z(0.0, 1.0);
                   const double sd = std::sqrt(nm.covariance_scale);
                   Matrix out(static_cast<Eigen::Index>(n), nm.mean.size());
                   for (Eigen::Index r = 0; r < out.rows(); ++r) {
                     for (Eigen::Index c = 0; c < out.cols(); ++c) out(r, c) = nm.mean[c] + sd * z(rng);
                   }
                   return out;
                 }},
      sampler);
}

ProblemSpec linear2d_spec(Linear2dVariant variant) {
  ProblemSpec spec;
  spec.name = variant == Linear2dVariant::TwoQoI ? "linear2d" : "linear2d-3q";
  spec.p = 2;
  auto row_map = [](double a1, double a2) {
    AffineMap m;
    m.a.resize(1, 2);
    m.a << a1, a2;
    m.b = Vector::Zero(1);
    return m;
  };
  spec.qoi_maps = {row_map(2.0, 1.0), row_map(2.5, 0.5)};
  if (variant == Linear2dVariant::ThreeQoI) spec.qoi_maps.push_back(row_map(-1.0, 1.0));
  UniformBox unit{Vector::Zero(2), Vector::Ones(2)};
  spec.init_sampler = unit;
  spec.dg_sampler = IndepBeta{{{3.0, 9.0}, {8.0, 2.0}}, unit};
  return spec;
}

ProblemSpec highdim_spec(std::size_t p, std::uint64_t seed) {
  constexpr std::size_t kQoi = 12;
  constexpr double kDecay = 0.8;
  ProblemSpec spec;
  spec.name = "highdim";
  spec.p = p;
  auto rng = make_rng(seed, kSurrogate);
  std::normal_distribution<double> z(0.0, 1.0);
  AffineMap m;
  m.a.resize(kQoi, static_cast<Eigen::Index>(p));
  for (Eigen::Index r = 0; r < m.a.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.a.cols(); ++c) m.a(r, c) = z(rng) * std::pow(kDecay, static_cast<double>(c));
  }
  m.b = Vector::Zero(kQoi);
  spec.qoi_maps = {m};
  spec.init_sampler = StdNormal{p};
  Vector mean = Vector::Zero(static_cast<Eigen::Index>(p));
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(16, mean.size()); ++i) mean[i] = (i % 2 == 0) ? 0.3 : -0.3;
  spec.dg_sampler = Normal{mean, 0.25};
  return spec;
}

std::vector<Matrix> observed_for_partition(const Matrix& observed_qoi, const SubspacePartition& partition) {
  std::vector<Matrix> out;
  for (const auto& g : partition.groups()) out.push_back(select_columns(observed_qoi, g));
  return out;
}

namespace {
GeneratedProblem generate(ProblemSpec spec, std::size_t n, std::uint64_t seed, SubspacePartition partition,
                          SubspacePartition joint_partition) {
  if (n < 2) throw Error(ErrorCode::TooFewSamples, "need n >= 2");
  spec.validate();
  Matrix params = sample_init(spec.init_sampler, n, seed);
  Matrix qoi = evaluate_qoi(spec, params);
  Matrix dg = sample_data_generating(spec.dg_sampler, n, seed);
  Matrix obs_qoi = evaluate_qoi(spec, dg);
  auto observed = observed_for_partition(obs_qoi, partition);
  return GeneratedProblem{std::move(spec),
                          validate_sample_set(std::move(params), std::move(qoi)),
                          std::move(dg),
                          std::move(obs_qoi),
                          std::move(observed),
                          std::move(partition),
                          std::move(joint_partition)};
}
}  // namespace

GeneratedProblem gen_linear2d(std::size_t n, std::uint64_t seed, Linear2dVariant variant) {
  ProblemSpec spec = linear2d_spec(variant);
  const std::size_t d = spec.qoi_dim();
  std::vector<std::size_t> all(d);
  std::iota(all.begin(), all.end(), std::size_t{0});
  return generate(std::move(spec), n, seed, SubspacePartition::singletons(d), SubspacePartition({all}, d));
}

SubspacePartition highdim_partition(Grouping grouping) {
  if (grouping == Grouping::Twelve1D) return SubspacePartition::singletons(12);
  // Sensors 1-4 observe (pressure, velocity) jointly, sensors 5-8 pressure only.
  return SubspacePartition({{0, 1}, {2, 3}, {4, 5}, {6, 7}, {8}, {9}, {10}, {11}}, 12);
}

GeneratedProblem gen_highdim_surrogate(std::size_t n, std::size_t p, std::uint64_t seed, Grouping grouping) {
  return generate(highdim_spec(p, seed), n, seed, highdim_partition(grouping),
                  highdim_partition(Grouping::FourJoint2DPlusFour1D));
}

Matrix product_of_marginals_observed(const std::vector<Matrix>& observed, std::uint64_t seed) {
  if (observed.empty()) throw Error(ErrorCode::InvalidArgument, "no observed columns");
  const Eigen::Index n = observed.front().rows();
  Eigen::Index total_cols = 0;
  for (const auto& m : observed) {
    if (m.rows() != n) throw Error(ErrorCode::RowCountMismatch, "observed sets differ in row count");
    total_cols += m.cols();
  }
  auto rng = make_rng(seed, kPermute);
  Matrix out(n, total_cols);
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  Eigen::Index col = 0;
  for (const auto& m : observed) {
    for (Eigen::Index c = 0; c < m.cols(); ++c, ++col) {
      std::iota(perm.begin(), perm.end(), Eigen::Index{0});
      std::shuffle(perm.begin(), perm.end(), rng);
      for (Eigen::Index r = 0; r < n; ++r) out(r, col) = m(perm[static_cast<std::size_t>(r)], c);
    }
  }
  return out;
}

}  // namespace idci
