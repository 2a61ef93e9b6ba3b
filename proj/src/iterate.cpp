#include "idci/iterate.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "idci/dci.hpp"
#include "idci/divergence.hpp"
#include "idci/error.hpp"

namespace idci {

std::vector<SubspaceData> prepare_subspaces(const SampleSet& samples, const SubspacePartition& partition,
                                            const std::vector<Matrix>& observed, Scaling scaling) {
  if (observed.size() != partition.k()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(observed.size()) + " observed sets for " +
                                               std::to_string(partition.k()) + " subspaces");
  }
  if (partition.qoi_dim() != samples.d()) {
    throw Error(ErrorCode::DimensionMismatch, "partition and samples disagree on QoI dimension");
  }
  Matrix qoi = samples.qoi();
  Vector means;
  Vector stds;
  if (scaling == Scaling::StandardScale) {
    ScaledColumns sc = standard_scale(qoi);
    qoi = std::move(sc.scaled);
    means = std::move(sc.means);
    stds = std::move(sc.stds);
  }
  std::vector<SubspaceData> out;
  for (std::size_t i = 0; i < partition.k(); ++i) {
    const auto& cols = partition.group(i);
    if (static_cast<std::size_t>(observed[i].cols()) != cols.size()) {
      throw Error(ErrorCode::DimensionMismatch,
                  "observed set " + std::to_string(i) + " has " + std::to_string(observed[i].cols()) +
                      " columns, subspace has " + std::to_string(cols.size()),
                  i);
    }
    if (observed[i].rows() < 2) throw Error(ErrorCode::TooFewSamples, "observed set " + std::to_string(i), i);
    if (!observed[i].allFinite()) throw Error(ErrorCode::NonFiniteValue, "observed set " + std::to_string(i), i);
    SubspaceData sd;
    sd.predicted = select_columns(qoi, cols);
    sd.observed = observed[i];
    if (scaling == Scaling::StandardScale) {
      Vector m(static_cast<Eigen::Index>(cols.size()));
      Vector s(static_cast<Eigen::Index>(cols.size()));
      for (std::size_t j = 0; j < cols.size(); ++j) {
        m[static_cast<Eigen::Index>(j)] = means[static_cast<Eigen::Index>(cols[j])];
        s[static_cast<Eigen::Index>(j)] = stds[static_cast<Eigen::Index>(cols[j])];
      }
      sd.observed = apply_scaling(sd.observed, m, s);
    }
    out.push_back(std::move(sd));
  }
  return out;
}

namespace {

// Observed-side quantities never change across epochs.
struct ObservedCache {
  Vector log_obs_at_pred;
  Vector log_obs_at_obs;
};

[[noreturn]] void rethrow_with_context(const Error& e, const std::string& where) {
  throw Error(e.code(), where + ": " + e.message(), e.row(), e.col());
}

[[noreturn]] void rethrow_with_context(const Error& e, std::size_t epoch, std::size_t subspace) {
  rethrow_with_context(e, "epoch " + std::to_string(epoch) + ", subspace " + std::to_string(subspace));
}

double relative_change(double now, double prev) {
  return std::abs(now - prev) / std::max(std::abs(prev), 1e-300);
}

}  // namespace

std::vector<double> subspace_kls(const std::vector<SubspaceData>& subspaces, const WeightVector& weights,
                                 KlEstimator estimator) {
  std::vector<double> kls;
  for (const auto& sd : subspaces) {
    const GaussianKde pred = fit_kde(sd.predicted, weights);
    const GaussianKde obs = fit_kde(sd.observed);
    kls.push_back(kl_estimate(estimator, obs.log_density(sd.observed), pred.log_density(sd.observed)));
  }
  return kls;
}

RunReport run_iterative_dci(const SampleSet& samples, const SubspacePartition& partition,
                            const std::vector<Matrix>& observed, const RunConfig& cfg,
                            const EpochObserver& on_epoch) {
  return run_iterative_dci(prepare_subspaces(samples, partition, observed, cfg.scaling), samples.n(), cfg,
                           on_epoch);
}

RunReport run_iterative_dci(const std::vector<SubspaceData>& subspaces, std::size_t n_samples,
                            const RunConfig& cfg, const EpochObserver& on_epoch) {
  cfg.validate();
  const std::size_t k = subspaces.size();
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "no subspaces");
  for (const auto& sd : subspaces) {
    if (static_cast<std::size_t>(sd.predicted.rows()) != n_samples) {
      throw Error(ErrorCode::RowCountMismatch, "subspace predicted rows differ from sample count");
    }
  }

  std::vector<ObservedCache> cache(k);
  for (std::size_t i = 0; i < k; ++i) {
    try {
      const GaussianKde obs = fit_kde(subspaces[i].observed);
      cache[i].log_obs_at_pred = obs.log_density(subspaces[i].predicted);
      cache[i].log_obs_at_obs = obs.log_density(subspaces[i].observed);
    } catch (const Error& e) {
      rethrow_with_context(e, "observed density of subspace " + std::to_string(i));
    }
  }

  RunReport report;
  report.config = cfg;
  WeightVector weights = WeightVector::ones(n_samples);
  std::vector<double> prev_kls;
  bool done = false;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs && !done; ++epoch) {
    report.epochs_run = epoch;
    for (std::size_t i = 0; i < k; ++i) {
      IterationRecord rec;
      rec.epoch = epoch;
      rec.subspace_index = i;
      const SubspaceData& sd = subspaces[i];
      try {
        const WeightVector unit = normalize_unit_mean(weights);
        const GaussianKde pred = fit_kde(sd.predicted, unit);
        const Vector ratios = ratios_from_log_densities(cache[i].log_obs_at_pred, pred.log_density(sd.predicted));
        DciStepResult step = apply_update(unit, ratios, i);
        rec.diagnostic_value = step.diagnostic;
        weights = std::move(step.new_weights);
        const GaussianKde updated = fit_kde(sd.predicted, weights);
        rec.kl_after_update = kl_estimate(cfg.kl_estimator, cache[i].log_obs_at_obs, updated.log_density(sd.observed));
      } catch (const Error& e) {
        rethrow_with_context(e, epoch, i);
      }
      report.per_iteration.push_back(rec);
      if (check_diagnostic(rec.diagnostic_value, cfg.diag_tol) == DiagnosticStatus::Fail) {
        report.termination = {TerminationKind::DiagnosticViolated, epoch, i};
        done = true;
        break;
      }
    }
    if (done) break;

    // The last subspace was just measured with the epoch-final weights.
    const std::size_t first = report.per_iteration.size() - k;
    std::vector<double> kls(k);
    kls[k - 1] = report.per_iteration.back().kl_after_update;
    for (std::size_t i = 0; i + 1 < k; ++i) {
      try {
        const GaussianKde pred = fit_kde(subspaces[i].predicted, weights);
        kls[i] = kl_estimate(cfg.kl_estimator, cache[i].log_obs_at_obs, pred.log_density(subspaces[i].observed));
      } catch (const Error& e) {
        rethrow_with_context(e, epoch, i);
      }
    }
    double amplitude = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      amplitude = std::max(amplitude, std::abs(kls[i] - report.per_iteration[first + i].kl_after_update));
    }
    report.per_iteration.back().per_subspace_kl_after_epoch = kls;
    report.limit_cycle_amplitude = amplitude;
    if (on_epoch) on_epoch(epoch, weights);

    const bool abs_ok = std::all_of(kls.begin(), kls.end(), [&](double v) { return std::abs(v) < cfg.abs_kl_tol; });
    bool rel_ok = !prev_kls.empty();
    for (std::size_t i = 0; rel_ok && i < k; ++i) rel_ok = relative_change(kls[i], prev_kls[i]) < cfg.rel_kl_tol;
    if (abs_ok) {
      report.termination = {TerminationKind::AbsKlReached, epoch, std::nullopt};
      done = true;
    } else if (rel_ok) {
      report.termination = {TerminationKind::RelKlReached, epoch, std::nullopt};
      done = true;
    }
    prev_kls = std::move(kls);
  }
  if (!done) report.termination = {TerminationKind::MaxEpochs, report.epochs_run, std::nullopt};
  report.final_weights = weights.values();
  return report;
}

std::vector<MarginalSnapshot> epoch_marginal_snapshot(const std::vector<SubspaceData>& subspaces,
                                                      const WeightVector& weights, std::size_t grid_per_dim) {
  if (grid_per_dim < 2) throw Error(ErrorCode::InvalidArgument, "grid_per_dim must be >= 2");
  std::vector<MarginalSnapshot> out;
  for (std::size_t i = 0; i < subspaces.size(); ++i) {
    const auto& sd = subspaces[i];
    MarginalSnapshot snap;
    snap.subspace = i;
    snap.dim = static_cast<std::size_t>(sd.predicted.cols());
    if (snap.dim > 2) {
      snap.skipped = true;
      out.push_back(std::move(snap));
      continue;
    }
    const GaussianKde pred = fit_kde(sd.predicted, weights);
    const GaussianKde obs = fit_kde(sd.observed);
    const Vector pad = 3.0 * pred.bandwidth().diagonal().cwiseMax(obs.bandwidth().diagonal()).array().sqrt();
    const Vector lo = sd.predicted.colwise().minCoeff().transpose().cwiseMin(sd.observed.colwise().minCoeff().transpose()) - pad;
    const Vector hi = sd.predicted.colwise().maxCoeff().transpose().cwiseMax(sd.observed.colwise().maxCoeff().transpose()) + pad;
    const auto g = static_cast<Eigen::Index>(grid_per_dim);
    if (snap.dim == 1) {
      snap.grid = Vector::LinSpaced(g, lo[0], hi[0]);
    } else {
      const Vector ax = Vector::LinSpaced(g, lo[0], hi[0]);
      const Vector ay = Vector::LinSpaced(g, lo[1], hi[1]);
      snap.grid.resize(g * g, 2);
      for (Eigen::Index a = 0; a < g; ++a) {
        for (Eigen::Index b = 0; b < g; ++b) {
          snap.grid(a * g + b, 0) = ax[a];
          snap.grid(a * g + b, 1) = ay[b];
        }
      }
    }
    snap.pushforward_density = eval_kde(pred, snap.grid);
    snap.observed_density = eval_kde(obs, snap.grid);
    out.push_back(std::move(snap));
  }
  return out;
}

std::vector<KlTraceEntry> kl_trace(const RunReport& report) {
  std::vector<KlTraceEntry> trace;
  trace.reserve(report.per_iteration.size());
  for (std::size_t t = 0; t < report.per_iteration.size(); ++t) {
    const auto& rec = report.per_iteration[t];
    trace.push_back({t + 1, rec.subspace_index, rec.kl_after_update});
  }
  return trace;
}

double kl_oscillation(const RunReport& report, std::size_t after_iteration) {
  const auto& its = report.per_iteration;
  std::vector<std::optional<double>> last;
  double worst = 0.0;
  for (std::size_t t = 0; t < its.size(); ++t) {
    const std::size_t i = its[t].subspace_index;
    if (i >= last.size()) last.resize(i + 1);
    if (t >= after_iteration && last[i]) worst = std::max(worst, std::abs(its[t].kl_after_update - *last[i]));
    last[i] = its[t].kl_after_update;
  }
  return worst;
}

}  // namespace idci
