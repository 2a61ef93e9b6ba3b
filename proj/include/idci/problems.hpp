#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "idci/core_model.hpp"

namespace idci {

/// Affine QoI map q = A lambda + b applied rowwise.
struct AffineMap {
  Matrix a;  // d_i x p
  Vector b;  // d_i
};

struct UniformBox {
  Vector lower;
  Vector upper;
};
struct StdNormal {
  std::size_t p = 0;
};
struct IndepBeta {
  std::vector<std::pair<double, double>> shapes;  // (alpha, beta) per parameter
  UniformBox box;                                 // Beta(0,1) draws mapped onto the box
};
struct Normal {
  Vector mean;
  double covariance_scale = 1.0;  // covariance = scale * I
};

using InitSampler = std::variant<UniformBox, StdNormal>;
using DataGenSampler = std::variant<IndepBeta, Normal>;

struct ProblemSpec {
  std::string name;
  std::size_t p = 0;
  std::vector<AffineMap> qoi_maps;  // stacked rowwise into the QoI matrix
  InitSampler init_sampler;
  DataGenSampler dg_sampler;

  std::size_t qoi_dim() const;
  /// Throws DimensionMismatch when maps or samplers disagree with p.
  void validate() const;
};

/// Stacked QoI of every map, one row per parameter row.
Matrix evaluate_qoi(const ProblemSpec& spec, const Matrix& params);

enum class Linear2dVariant { TwoQoI, ThreeQoI };
enum class Grouping { Twelve1D, FourJoint2DPlusFour1D };

struct GeneratedProblem {
  ProblemSpec spec;
  SampleSet predicted;
  Matrix dg_params;
  Matrix observed_qoi;            // full observed QoI, rows aligned
  std::vector<Matrix> observed;   // one matrix per partition group
  SubspacePartition partition;
  SubspacePartition joint_partition;  // all-joint grouping for linear2d, paired for highdim
};

ProblemSpec linear2d_spec(Linear2dVariant variant);
ProblemSpec highdim_spec(std::size_t p, std::uint64_t seed);

/// Observed matrices for each group of `partition` from a full observed QoI.
std::vector<Matrix> observed_for_partition(const Matrix& observed_qoi, const SubspacePartition& partition);

/// Uniform [0,1]^2 initial vs Beta(3,9) x Beta(8,2) data-generating, QoI
/// 2l1+l2, 2.5l1+0.5l2 (and -l1+l2 for ThreeQoI). One subspace per QoI.
GeneratedProblem gen_linear2d(std::size_t n, std::uint64_t seed, Linear2dVariant variant);

/// Standard-normal initial in R^p, N(lambda_dg, 0.25 I) data-generating,
/// 12 QoI from a seeded affine surrogate whose column weights decay by 0.8.
GeneratedProblem gen_highdim_surrogate(std::size_t n, std::size_t p, std::uint64_t seed, Grouping grouping);

SubspacePartition highdim_partition(Grouping grouping);

/// Independently permutes every column, destroying cross-column dependence.
Matrix product_of_marginals_observed(const std::vector<Matrix>& observed, std::uint64_t seed);

Matrix sample_init(const InitSampler& sampler, std::size_t n, std::uint64_t seed);
Matrix sample_data_generating(const DataGenSampler& sampler, std::size_t n, std::uint64_t seed);

}  // namespace idci
