#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "idci/core_model.hpp"
#include "idci/iterate.hpp"
#include "idci/problems.hpp"

namespace idci {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

// ---- config ---------------------------------------------------------------
//
// Flat `key = value` lines; `#` starts a comment. Keys:
//   abs_kl_tol (required), diag_tol, rel_kl_tol, max_epochs, seed,
//   bandwidth_rule (scott), kl_estimator (normalized_points | sample_average),
//   scaling (none | standard), snapshot_epochs (comma list), grid_per_dim.

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);
std::string format_config(const RunConfig& cfg);

// ---- sample CSV -----------------------------------------------------------

struct CsvTable {
  std::vector<std::string> header;
  Matrix data;
};

/// Header row plus numeric rows. Errors carry 1-based line and column.
CsvTable parse_samples_csv(std::string_view text, std::optional<std::size_t> expected_cols = std::nullopt);
CsvTable load_samples_csv(const std::filesystem::path& path, std::optional<std::size_t> expected_cols = std::nullopt);
void write_samples_csv(const std::filesystem::path& path, const std::vector<std::string>& header, const Matrix& data);

// ---- partition descriptor ---------------------------------------------------
// One line per subspace listing its 0-based QoI columns, comma-separated.

std::string format_partition(const SubspacePartition& partition);
SubspacePartition parse_partition(std::string_view text, std::size_t qoi_dim);
void write_partition(const std::filesystem::path& path, const SubspacePartition& partition);
SubspacePartition read_partition(const std::filesystem::path& path, std::size_t qoi_dim);

// ---- run report -------------------------------------------------------------

std::string report_to_json(const RunReport& report);
RunReport report_from_json(std::string_view text);
void write_report(const RunReport& report, const std::filesystem::path& path);
RunReport read_report(const std::filesystem::path& path);
/// Termination reason, epochs, final per-subspace KLs and diagnostics.
std::string summarize_report(const RunReport& report);

// ---- plot series --------------------------------------------------------------

struct EpochSnapshot {
  std::size_t epoch = 0;
  std::vector<MarginalSnapshot> marginals;
};

/// marginal_e<epoch>_s<subspace>.csv for every non-skipped snapshot plus
/// kl_trace.csv. Returns the written paths in order.
std::vector<std::filesystem::path> export_plot_series(const std::vector<EpochSnapshot>& snapshots,
                                                      const std::vector<KlTraceEntry>& trace,
                                                      const std::filesystem::path& out_dir);

// ---- data directories ---------------------------------------------------------
//
// params.csv, predicted_qoi.csv, observed_<j>.csv (one per QoI column,
// 1-based), partition.txt and partition_joint.txt.

void write_generated(const GeneratedProblem& problem, const std::filesystem::path& dir);

struct DataBundle {
  SampleSet samples;
  Matrix observed_qoi;
  SubspacePartition partition;
  SubspacePartition joint_partition;
};

DataBundle load_data_dir(const std::filesystem::path& dir);

enum class GroupingChoice {
  File,          // partition.txt
  Singletons,    // one subspace per QoI column
  Joint,         // partition_joint.txt
  JointProduct,  // joint grouping against independently permuted observed columns
};

GroupingChoice parse_grouping(std::string_view s);

struct RunOutput {
  RunReport report;
  std::vector<std::filesystem::path> written;
};

/// Runs the iterative scheme on a data directory and, when `out_dir` is set,
/// writes report.json and the plot series there.
RunOutput run_on_data(const RunConfig& cfg, const DataBundle& data, GroupingChoice grouping,
                      const std::optional<std::filesystem::path>& out_dir);

}  // namespace idci
