#include "idci/core_model.hpp"

#include <cmath>

#include "idci/error.hpp"

namespace idci {

SampleSet validate_sample_set(Matrix raw_params, Matrix raw_qoi) {
  if (raw_params.rows() != raw_qoi.rows()) {
    throw Error(ErrorCode::RowCountMismatch,
                "params has " + std::to_string(raw_params.rows()) + " rows, qoi has " +
                    std::to_string(raw_qoi.rows()));
  }
  if (raw_qoi.rows() < 2) {
    throw Error(ErrorCode::TooFewSamples, "need at least 2 samples");
  }
  if (raw_params.cols() < 1 || raw_qoi.cols() < 1) {
    throw Error(ErrorCode::DimensionMismatch, "params and qoi need at least one column");
  }
  for (const Matrix* m : {&raw_params, &raw_qoi}) {
    for (Eigen::Index r = 0; r < m->rows(); ++r) {
      for (Eigen::Index c = 0; c < m->cols(); ++c) {
        if (!std::isfinite((*m)(r, c))) {
          throw Error(ErrorCode::NonFiniteValue,
                      std::string(m == &raw_params ? "params" : "qoi") + "(" + std::to_string(r) +
                          "," + std::to_string(c) + ")",
                      static_cast<std::size_t>(r), static_cast<std::size_t>(c));
        }
      }
    }
  }
  return SampleSet(std::move(raw_params), std::move(raw_qoi));
}

WeightVector::WeightVector(Vector w) : w_(std::move(w)) {
  for (Eigen::Index i = 0; i < w_.size(); ++i) {
    if (!(w_[i] >= 0.0) || !std::isfinite(w_[i])) {
      throw Error(ErrorCode::InvalidValue, "weight " + std::to_string(i) + " is negative or non-finite",
                  static_cast<std::size_t>(i));
    }
  }
}

WeightVector normalize_unit_mean(const WeightVector& w) {
  const double total = w.values().sum();
  if (!(total > 0.0)) throw Error(ErrorCode::AllZeroWeights, "weights sum to zero");
  const double scale = static_cast<double>(w.size()) / total;
  return WeightVector(w.values() * scale);
}

SubspacePartition::SubspacePartition(std::vector<std::vector<std::size_t>> groups, std::size_t qoi_dim)
    : groups_(std::move(groups)), qoi_dim_(qoi_dim) {
  if (groups_.empty()) throw Error(ErrorCode::InvalidArgument, "partition needs at least one group");
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    if (groups_[g].empty()) {
      throw Error(ErrorCode::InvalidArgument, "group " + std::to_string(g) + " is empty", g);
    }
    for (std::size_t c : groups_[g]) {
      if (c >= qoi_dim_) {
        throw Error(ErrorCode::IndexOutOfRange,
                    "group " + std::to_string(g) + " references column " + std::to_string(c) +
                        " of a " + std::to_string(qoi_dim_) + "-column qoi matrix",
                    g, c);
      }
    }
  }
}

SubspacePartition SubspacePartition::singletons(std::size_t qoi_dim) {
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t c = 0; c < qoi_dim; ++c) groups.push_back({c});
  return SubspacePartition(std::move(groups), qoi_dim);
}

Matrix select_columns(const Matrix& m, const std::vector<std::size_t>& cols) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j] >= static_cast<std::size_t>(m.cols())) {
      throw Error(ErrorCode::IndexOutOfRange, "column " + std::to_string(cols[j]), std::nullopt, cols[j]);
    }
    out.col(static_cast<Eigen::Index>(j)) = m.col(static_cast<Eigen::Index>(cols[j]));
  }
  return out;
}

void RunConfig::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(diag_tol)) throw Error(ErrorCode::InvalidValue, "diag_tol must be > 0");
  if (!positive(abs_kl_tol)) throw Error(ErrorCode::InvalidValue, "abs_kl_tol must be > 0");
  if (!positive(rel_kl_tol)) throw Error(ErrorCode::InvalidValue, "rel_kl_tol must be > 0");
  if (max_epochs < 1) throw Error(ErrorCode::InvalidValue, "max_epochs must be >= 1");
  if (grid_per_dim < 2) throw Error(ErrorCode::InvalidValue, "grid_per_dim must be >= 2");
}

std::string to_string(TerminationKind kind) {
  switch (kind) {
    case TerminationKind::DiagnosticViolated: return "DiagnosticViolated";
    case TerminationKind::AbsKlReached: return "AbsKl";
    case TerminationKind::RelKlReached: return "RelKl";
    case TerminationKind::MaxEpochs: return "MaxEpochs";
  }
  return "MaxEpochs";
}

std::optional<TerminationKind> termination_from_string(const std::string& s) {
  for (auto k : {TerminationKind::DiagnosticViolated, TerminationKind::AbsKlReached,
                 TerminationKind::RelKlReached, TerminationKind::MaxEpochs}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::vector<std::vector<double>> RunReport::epoch_kls() const {
  std::vector<std::vector<double>> out;
  for (const auto& rec : per_iteration) {
    if (!rec.per_subspace_kl_after_epoch.empty()) out.push_back(rec.per_subspace_kl_after_epoch);
  }
  return out;
}

ScaledColumns standard_scale(const Matrix& columns) {
  const Eigen::Index n = columns.rows();
  if (n < 2) throw Error(ErrorCode::TooFewSamples, "standard_scale needs at least 2 rows");
  ScaledColumns out;
  out.means = columns.colwise().mean().transpose();
  out.stds.resize(columns.cols());
  for (Eigen::Index c = 0; c < columns.cols(); ++c) {
    const double var =
        (columns.col(c).array() - out.means[c]).square().sum() / static_cast<double>(n - 1);
    const double sd = std::sqrt(var);
    if (!(sd > 0.0)) {
      throw Error(ErrorCode::ZeroVarianceColumn, "column " + std::to_string(c) + " is constant",
                  std::nullopt, static_cast<std::size_t>(c));
    }
    out.stds[c] = sd;
  }
  out.scaled = apply_scaling(columns, out.means, out.stds);
  return out;
}

Matrix apply_scaling(const Matrix& columns, const Vector& means, const Vector& stds) {
  if (columns.cols() != means.size() || columns.cols() != stds.size()) {
    throw Error(ErrorCode::DimensionMismatch, "scaling parameters do not match column count");
  }
  Matrix out = columns;
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    out.col(c) = (out.col(c).array() - means[c]) / stds[c];
  }
  return out;
}

Matrix invert_scaling(const Matrix& scaled, const Vector& means, const Vector& stds) {
  if (scaled.cols() != means.size() || scaled.cols() != stds.size()) {
    throw Error(ErrorCode::DimensionMismatch, "scaling parameters do not match column count");
  }
  Matrix out = scaled;
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    out.col(c) = out.col(c).array() * stds[c] + means[c];
  }
  return out;
}

}  // namespace idci
