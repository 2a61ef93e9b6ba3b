#include "idci/discrete_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "idci/error.hpp"

namespace idci {

namespace {

constexpr double kNormTol = 1e-14;

std::size_t grid_size(std::span<const std::size_t> shape) {
  std::size_t n = 1;
  for (std::size_t s : shape) {
    if (s == 0) throw Error(ErrorCode::InvalidArgument, "grid axis of size 0");
    n *= s;
  }
  return n;
}

void require_probability_vector(const std::vector<double>& p, const char* what) {
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i]) || p[i] < 0.0) {
      throw Error(ErrorCode::InvalidValue, std::string(what) + " entry " + std::to_string(i) + " is negative or non-finite",
                  i);
    }
    sum += p[i];
  }
  if (std::abs(sum - 1.0) > kNormTol) {
    throw Error(ErrorCode::NotNormalized, std::string(what) + " sums to " + std::to_string(sum));
  }
}

std::vector<double> fiber_sums(const DiscreteJoint& joint, const CellMap& map) {
  std::vector<double> out(map.out_size, 0.0);
  const auto& p = joint.probs();
  for (std::size_t x = 0; x < p.size(); ++x) out[map.target[x]] += p[x];
  return out;
}

void require_index(const DiscreteJoint& joint, std::size_t i) {
  if (i >= joint.k()) {
    throw Error(ErrorCode::IndexOutOfRange,
                "constraint index " + std::to_string(i) + " out of range for k = " + std::to_string(joint.k()), i);
  }
}

}  // namespace

CellMap coordinate_map(std::span<const std::size_t> shape, std::size_t axis) {
  const std::size_t a[] = {axis};
  return axes_map(shape, a);
}

CellMap axes_map(std::span<const std::size_t> shape, std::span<const std::size_t> axes) {
  const std::size_t n = grid_size(shape);
  std::vector<std::size_t> stride(shape.size(), 1);
  for (std::size_t d = shape.size(); d-- > 1;) stride[d - 1] = stride[d] * shape[d];
  CellMap map;
  map.out_size = 1;
  for (std::size_t ax : axes) {
    if (ax >= shape.size()) throw Error(ErrorCode::IndexOutOfRange, "axis " + std::to_string(ax) + " out of range", ax);
    map.out_size *= shape[ax];
  }
  map.target.resize(n);
  for (std::size_t x = 0; x < n; ++x) {
    std::size_t c = 0;
    for (std::size_t ax : axes) c = c * shape[ax] + (x / stride[ax]) % shape[ax];
    map.target[x] = c;
  }
  return map;
}

DiscreteJoint::DiscreteJoint(std::vector<std::size_t> shape, std::vector<double> probs, std::vector<CellMap> maps)
    : shape_(std::move(shape)), probs_(std::move(probs)), maps_(std::move(maps)) {
  if (grid_size(shape_) != probs_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "probability table size does not match the grid shape");
  }
  require_probability_vector(probs_, "joint");
  for (std::size_t i = 0; i < maps_.size(); ++i) {
    const CellMap& m = maps_[i];
    if (m.target.size() != probs_.size()) {
      throw Error(ErrorCode::DimensionMismatch, "map " + std::to_string(i) + " is not total on the grid", i);
    }
    for (std::size_t x = 0; x < m.target.size(); ++x) {
      if (m.target[x] >= m.out_size) {
        throw Error(ErrorCode::IndexOutOfRange,
                    "map " + std::to_string(i) + " sends cell " + std::to_string(x) + " outside its output grid", i, x);
      }
    }
  }
}

DiscreteJoint DiscreteJoint::with_probs(std::vector<double> probs) const {
  return DiscreteJoint(shape_, std::move(probs), maps_);
}

DiscreteJoint DiscreteJoint::uniform(std::vector<std::size_t> shape, std::vector<CellMap> maps) {
  const std::size_t n = grid_size(shape);
  return DiscreteJoint(std::move(shape), std::vector<double>(n, 1.0 / static_cast<double>(n)), std::move(maps));
}

DiscreteMarginal::DiscreteMarginal(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw Error(ErrorCode::InvalidArgument, "empty marginal");
  require_probability_vector(probs_, "marginal");
}

DiscreteMarginal pushforward(const DiscreteJoint& joint, std::size_t i) {
  require_index(joint, i);
  return DiscreteMarginal(fiber_sums(joint, joint.maps()[i]));
}

DiscreteJoint discrete_dci_update(const DiscreteJoint& joint, std::size_t i, const DiscreteMarginal& obs) {
  require_index(joint, i);
  const CellMap& map = joint.maps()[i];
  if (obs.size() != map.out_size) {
    throw Error(ErrorCode::DimensionMismatch, "observed marginal size does not match output grid of map " +
                                                  std::to_string(i));
  }
  const std::vector<double> pred = fiber_sums(joint, map);
  const auto& o = obs.probs();
  for (std::size_t c = 0; c < pred.size(); ++c) {
    if (o[c] > 0.0 && pred[c] == 0.0) {
      throw Error(ErrorCode::PredictabilityViolated,
                  "observed mass on output cell " + std::to_string(c) + " with zero predicted mass", c);
    }
  }
  std::vector<double> next(joint.cells());
  const auto& p = joint.probs();
  for (std::size_t x = 0; x < p.size(); ++x) {
    const std::size_t c = map.target[x];
    next[x] = pred[c] > 0.0 ? p[x] * (o[c] / pred[c]) : 0.0;
  }
  return joint.with_probs(std::move(next));
}

void check_feasibility(const DiscreteJoint& joint0, const std::vector<DiscreteMarginal>& obs) {
  if (obs.size() != joint0.k()) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(joint0.k()) + " observed marginals");
  }
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const CellMap& map = joint0.maps()[i];
    if (obs[i].size() != map.out_size) {
      throw Error(ErrorCode::DimensionMismatch, "observed marginal " + std::to_string(i) + " has the wrong size", i);
    }
    std::vector<bool> hit(map.out_size, false);
    for (std::size_t t : map.target) hit[t] = true;
    for (std::size_t c = 0; c < map.out_size; ++c) {
      if (obs[i].probs()[c] > 0.0 && !hit[c]) {
        throw Error(ErrorCode::EmptyFiber,
                    "output cell " + std::to_string(c) + " of map " + std::to_string(i) + " has no preimage", i, c);
      }
    }
  }
}

double total_variation(const DiscreteJoint& a, const DiscreteJoint& b) {
  return f_divergence_discrete(a.probs(), b.probs(), FDivergenceKind::TotalVariation);
}

double entropy(const DiscreteJoint& joint) {
  double h = 0.0;
  for (double p : joint.probs()) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double kl(const DiscreteJoint& p, const DiscreteJoint& q) {
  return f_divergence_discrete(p.probs(), q.probs(), FDivergenceKind::KL);
}

DiscreteIteration iterate_discrete(const DiscreteJoint& joint0, const std::vector<DiscreteMarginal>& obs,
                                   std::size_t max_epochs, double tv_tol, bool record_trajectory) {
  check_feasibility(joint0, obs);
  if (!(tv_tol > 0.0)) throw Error(ErrorCode::InvalidValue, "tv_tol must be positive");
  DiscreteIteration out{joint0, 0, 0, {}, {}};
  if (record_trajectory) out.trajectory.push_back(joint0);
  DiscreteJoint current = joint0;
  for (std::size_t epoch = 1; epoch <= max_epochs; ++epoch) {
    const DiscreteJoint start = current;
    for (std::size_t i = 0; i < joint0.k(); ++i) {
      current = discrete_dci_update(current, i, obs[i]);
      if (record_trajectory) out.trajectory.push_back(current);
    }
    const double tv = total_variation(current, start);
    out.tv_history.push_back(tv);
    out.epochs_run = epoch;
    if (tv >= tv_tol) out.epochs = epoch;
    if (tv < tv_tol) {
      out.limit = current;
      return out;
    }
  }
  throw Error(ErrorCode::MaxEpochsExceeded,
              "no convergence within " + std::to_string(max_epochs) + " epochs (last TV " +
                  std::to_string(out.tv_history.empty() ? 0.0 : out.tv_history.back()) + ")");
}

std::vector<double> pythagorean_residuals(const DiscreteJoint& joint0, const std::vector<DiscreteJoint>& trajectory,
                                          const DiscreteJoint& feasible) {
  const double kl_f0 = kl(feasible, joint0);
  std::vector<double> residuals;
  residuals.reserve(trajectory.size() + 1);
  residuals.push_back(0.0);
  std::size_t start = 0;
  if (!trajectory.empty() && trajectory.front().probs() == joint0.probs()) start = 1;
  double steps = 0.0;
  const DiscreteJoint* prev = &joint0;
  for (std::size_t n = start; n < trajectory.size(); ++n) {
    steps += kl(trajectory[n], *prev);
    residuals.push_back(std::abs(kl_f0 - kl(feasible, trajectory[n]) - steps));
    prev = &trajectory[n];
  }
  return residuals;
}

double pythagorean_residual(const DiscreteJoint& joint0, const std::vector<DiscreteJoint>& trajectory,
                            const DiscreteJoint& feasible) {
  const auto r = pythagorean_residuals(joint0, trajectory, feasible);
  return *std::max_element(r.begin(), r.end());
}

DiscreteJoint perturb_within_fibers(const DiscreteJoint& p_up, std::size_t i, const DiscreteMarginal& obs,
                                    std::mt19937_64& rng) {
  require_index(p_up, i);
  const CellMap& map = p_up.maps()[i];
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> q(p_up.cells());
  for (std::size_t x = 0; x < q.size(); ++x) q[x] = p_up.probs()[x] * std::exp(u(rng));
  std::vector<double> mass(map.out_size, 0.0);
  for (std::size_t x = 0; x < q.size(); ++x) mass[map.target[x]] += q[x];
  for (std::size_t x = 0; x < q.size(); ++x) {
    const std::size_t c = map.target[x];
    q[x] = mass[c] > 0.0 ? q[x] * (obs.probs()[c] / mass[c]) : 0.0;
  }
  return p_up.with_probs(std::move(q));
}

double verify_forward_optimality(const DiscreteJoint& joint0, std::size_t i, const DiscreteMarginal& obs,
                                 std::size_t trials, std::span<const FDivergenceKind> kinds, std::uint64_t rng_seed) {
  const DiscreteJoint p_up = discrete_dci_update(joint0, i, obs);
  std::mt19937_64 rng(rng_seed);
  std::vector<double> best(kinds.size());
  for (std::size_t j = 0; j < kinds.size(); ++j) best[j] = f_divergence_discrete(p_up.probs(), joint0.probs(), kinds[j]);
  double violation = -INFINITY;
  for (std::size_t t = 0; t < trials; ++t) {
    const DiscreteJoint p = perturb_within_fibers(p_up, i, obs, rng);
    for (std::size_t j = 0; j < kinds.size(); ++j) {
      violation = std::max(violation, best[j] - f_divergence_discrete(p.probs(), joint0.probs(), kinds[j]));
    }
  }
  return violation;
}

double verify_backward_optimality(const DiscreteJoint& joint0, std::size_t i, const DiscreteMarginal& obs,
                                  std::size_t trials, std::uint64_t rng_seed) {
  const DiscreteJoint p_up = discrete_dci_update(joint0, i, obs);
  std::mt19937_64 rng(rng_seed);
  const double best = kl(joint0, p_up);
  double violation = -INFINITY;
  for (std::size_t t = 0; t < trials; ++t) {
    const DiscreteJoint p = perturb_within_fibers(p_up, i, obs, rng);
    violation = std::max(violation, best - kl(joint0, p));
  }
  return violation;
}

IProjectionCheck i_projection_check(const DiscreteJoint& joint0, const std::vector<DiscreteMarginal>& obs,
                                    const DiscreteJoint& limit, std::size_t trials, std::uint64_t rng_seed) {
  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> pos(0.05, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const bool uniform0 = std::all_of(joint0.probs().begin(), joint0.probs().end(),
                                    [&](double p) { return p == joint0.probs().front(); });
  const double kl_limit = kl(limit, joint0);
  const double h_limit = entropy(limit);

  IProjectionCheck out;
  out.kl_violation = -INFINITY;
  if (uniform0) out.entropy_violation = -INFINITY;

  auto consider = [&](const DiscreteJoint& p) {
    out.kl_violation = std::max(out.kl_violation, kl_limit - kl(p, joint0));
    if (uniform0) out.entropy_violation = std::max(*out.entropy_violation, entropy(p) - h_limit);
    ++out.measures_checked;
  };

  std::vector<DiscreteJoint> pool;
  for (std::size_t t = 0; t < trials; ++t) {
    std::vector<double> start(joint0.cells(), 0.0);
    double sum = 0.0;
    for (std::size_t x = 0; x < start.size(); ++x) {
      if (joint0.probs()[x] > 0.0) start[x] = pos(rng);
      sum += start[x];
    }
    for (double& v : start) v /= sum;
    const DiscreteJoint f = iterate_discrete(joint0.with_probs(std::move(start)), obs, kDefaultMaxEpochs, kDefaultTvTol, false).limit;
    consider(f);
    // Convex combinations stay in the polytope up to the convergence tolerance.
    const DiscreteJoint& other = pool.empty() ? limit : pool[static_cast<std::size_t>(unit(rng) * pool.size())];
    const double a = unit(rng);
    std::vector<double> mix(f.cells());
    for (std::size_t x = 0; x < mix.size(); ++x) mix[x] = a * f.probs()[x] + (1.0 - a) * other.probs()[x];
    double msum = std::accumulate(mix.begin(), mix.end(), 0.0);
    for (double& v : mix) v /= msum;
    consider(joint0.with_probs(std::move(mix)));
    pool.push_back(f);
  }
  if (out.measures_checked == 0) out.kl_violation = 0.0;
  return out;
}

bool mutual_ac_check(const std::vector<DiscreteJoint>& trajectory, std::size_t k) {
  if (trajectory.size() < 2 * k || trajectory.empty()) {
    throw Error(ErrorCode::PreconditionViolated,
                "trajectory of length " + std::to_string(trajectory.size()) + " is shorter than 2k = " +
                    std::to_string(2 * k));
  }
  const auto& ref = trajectory[k].probs();
  for (std::size_t n = k + 1; n < trajectory.size(); ++n) {
    const auto& p = trajectory[n].probs();
    if (p.size() != ref.size()) return false;
    for (std::size_t x = 0; x < p.size(); ++x) {
      if ((p[x] > 0.0) != (ref[x] > 0.0)) return false;
    }
  }
  return true;
}

}  // namespace idci
