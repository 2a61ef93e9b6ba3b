#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "idci/core_model.hpp"
#include "idci/density.hpp"
#include "idci/divergence.hpp"

namespace idci {

/// Predicted and observed QoI restricted to one subspace, after scaling.
struct SubspaceData {
  Matrix predicted;
  Matrix observed;
};

/// Splits the QoI into subspaces and applies cfg scaling. Standard scaling
/// uses the predicted-sample statistics for both predicted and observed data.
std::vector<SubspaceData> prepare_subspaces(const SampleSet& samples, const SubspacePartition& partition,
                                            const std::vector<Matrix>& observed, Scaling scaling);

/// Called with the epoch-final weights after every completed epoch.
using EpochObserver = std::function<void(std::size_t epoch, const WeightVector& weights)>;

/// Iterative DCI over the partition's subspaces, starting from unit weights.
/// observed[i] holds the observed samples of subspace i.
RunReport run_iterative_dci(const SampleSet& samples, const SubspacePartition& partition,
                            const std::vector<Matrix>& observed, const RunConfig& cfg,
                            const EpochObserver& on_epoch = {});

/// Same loop on already-prepared subspace data.
RunReport run_iterative_dci(const std::vector<SubspaceData>& subspaces, std::size_t n_samples,
                            const RunConfig& cfg, const EpochObserver& on_epoch = {});

/// KL(observed || weighted push-forward) on each subspace.
std::vector<double> subspace_kls(const std::vector<SubspaceData>& subspaces, const WeightVector& weights,
                                 KlEstimator estimator = KlEstimator::NormalizedObservedPoints);

struct MarginalSnapshot {
  std::size_t subspace = 0;
  std::size_t dim = 0;
  bool skipped = false;  // d_i > 2
  Matrix grid;           // grid_per_dim^dim rows, dim columns
  Vector pushforward_density;
  Vector observed_density;
};

/// Gridded weighted push-forward and observed KDEs per subspace (d_i <= 2),
/// over the data range padded by 3 kernel standard deviations.
std::vector<MarginalSnapshot> epoch_marginal_snapshot(const std::vector<SubspaceData>& subspaces,
                                                      const WeightVector& weights, std::size_t grid_per_dim);

struct KlTraceEntry {
  std::size_t iteration = 0;  // 1-based, execution order
  std::size_t subspace = 0;
  double kl = 0.0;

  friend bool operator==(const KlTraceEntry&, const KlTraceEntry&) = default;
};

/// One entry per iteration: the KL of the updated subspace after its update.
std::vector<KlTraceEntry> kl_trace(const RunReport& report);

/// Largest change of a subspace's trace value from its previous visit, over
/// iterations numbered above `after_iteration` (1-based).
double kl_oscillation(const RunReport& report, std::size_t after_iteration);

}  // namespace idci
