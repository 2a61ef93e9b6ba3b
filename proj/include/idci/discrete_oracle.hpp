#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "idci/divergence.hpp"

namespace idci {

/// Deterministic map from parameter cells (row-major over the grid) to the
/// cells of an output grid of size `out_size`.
struct CellMap {
  std::vector<std::size_t> target;
  std::size_t out_size = 0;

  friend bool operator==(const CellMap&, const CellMap&) = default;
};

/// Projection of a row-major grid onto one axis.
CellMap coordinate_map(std::span<const std::size_t> shape, std::size_t axis);
/// Projection onto several axes jointly; output cells row-major over them.
CellMap axes_map(std::span<const std::size_t> shape, std::span<const std::size_t> axes);

/// Probability table on a finite product grid together with the k
/// constraint maps.
class DiscreteJoint {
 public:
  DiscreteJoint(std::vector<std::size_t> shape, std::vector<double> probs, std::vector<CellMap> maps);

  /// Same grid and maps, new probabilities.
  DiscreteJoint with_probs(std::vector<double> probs) const;

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  const std::vector<double>& probs() const noexcept { return probs_; }
  const std::vector<CellMap>& maps() const noexcept { return maps_; }
  std::size_t cells() const noexcept { return probs_.size(); }
  std::size_t k() const noexcept { return maps_.size(); }

  static DiscreteJoint uniform(std::vector<std::size_t> shape, std::vector<CellMap> maps);

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> probs_;
  std::vector<CellMap> maps_;
};

class DiscreteMarginal {
 public:
  explicit DiscreteMarginal(std::vector<double> probs);
  const std::vector<double>& probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return probs_.size(); }

 private:
  std::vector<double> probs_;
};

DiscreteMarginal pushforward(const DiscreteJoint& joint, std::size_t i);

/// probs'_x = probs_x * obs_c / pred_c with c = phi_i(x); cells whose
/// predicted and observed mass are both zero stay zero.
DiscreteJoint discrete_dci_update(const DiscreteJoint& joint, std::size_t i, const DiscreteMarginal& obs);

/// Throws EmptyFiber when an observed cell with positive mass has no
/// preimage, or DimensionMismatch when sizes disagree with the maps.
void check_feasibility(const DiscreteJoint& joint0, const std::vector<DiscreteMarginal>& obs);

double total_variation(const DiscreteJoint& a, const DiscreteJoint& b);
double entropy(const DiscreteJoint& joint);
double kl(const DiscreteJoint& p, const DiscreteJoint& q);

struct DiscreteIteration {
  DiscreteJoint limit;
  /// Epochs that still moved the joint by tv_tol or more; the limit is
  /// reached after this many epochs.
  std::size_t epochs = 0;
  std::size_t epochs_run = 0;
  std::vector<double> tv_history;  // TV between consecutive epoch-final joints
  /// joint0 followed by the joint after every single update.
  std::vector<DiscreteJoint> trajectory;
};

inline constexpr double kDefaultTvTol = 1e-12;
inline constexpr std::size_t kDefaultMaxEpochs = 10000;

DiscreteIteration iterate_discrete(const DiscreteJoint& joint0, const std::vector<DiscreteMarginal>& obs,
                                   std::size_t max_epochs = kDefaultMaxEpochs, double tv_tol = kDefaultTvTol,
                                   bool record_trajectory = true);

/// Per-step |KL(F||P0) - KL(F||Pn) - sum_{m<=n} KL(Pm||Pm-1)| for a feasible F.
std::vector<double> pythagorean_residuals(const DiscreteJoint& joint0, const std::vector<DiscreteJoint>& trajectory,
                                          const DiscreteJoint& feasible);
/// Max of pythagorean_residuals. `trajectory` may start with joint0 itself.
double pythagorean_residual(const DiscreteJoint& joint0, const std::vector<DiscreteJoint>& trajectory,
                            const DiscreteJoint& feasible);

/// Random feasible P for constraint i: P_up with each cell scaled by exp(u),
/// u ~ U[-1, 1], then renormalized per fiber to the observed fiber mass.
DiscreteJoint perturb_within_fibers(const DiscreteJoint& p_up, std::size_t i, const DiscreteMarginal& obs,
                                    std::mt19937_64& rng);

/// max over trials and kinds of D_f(P_up || joint0) - D_f(P || joint0).
double verify_forward_optimality(const DiscreteJoint& joint0, std::size_t i, const DiscreteMarginal& obs,
                                 std::size_t trials, std::span<const FDivergenceKind> kinds, std::uint64_t rng_seed);

/// max over trials of KL(joint0 || P_up) - KL(joint0 || P).
double verify_backward_optimality(const DiscreteJoint& joint0, std::size_t i, const DiscreteMarginal& obs,
                                  std::size_t trials, std::uint64_t rng_seed);

struct IProjectionCheck {
  double kl_violation = 0.0;                 // max KL(limit||P0) - KL(P||P0)
  std::optional<double> entropy_violation;   // max H(P) - H(limit), uniform P0 only
  std::size_t measures_checked = 0;
};

/// Compares the limit against feasible measures built from randomized
/// strictly positive starts (run to convergence) and convex combinations.
IProjectionCheck i_projection_check(const DiscreteJoint& joint0, const std::vector<DiscreteMarginal>& obs,
                                    const DiscreteJoint& limit, std::size_t trials, std::uint64_t rng_seed);

/// True iff every joint from index k onward shares one zero pattern.
/// Throws PreconditionViolated when the trajectory is shorter than 2k.
bool mutual_ac_check(const std::vector<DiscreteJoint>& trajectory, std::size_t k);

}  // namespace idci
