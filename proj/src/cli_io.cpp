#include "idci/cli_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "idci/error.hpp"

namespace idci {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      if (pos < text.size()) lines.push_back(text.substr(pos));
      break;
    }
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  for (auto& l : lines) {
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
  }
  return lines;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const auto c = s.find(sep, pos);
    out.push_back(s.substr(pos, c == std::string_view::npos ? std::string_view::npos : c - pos));
    if (c == std::string_view::npos) break;
    pos = c + 1;
  }
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::uint64_t> parse_u64(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, "read failed: " + path.string());
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create directory " + dir.string() + ": " + ec.message());
}

std::string estimator_name(KlEstimator e) {
  return e == KlEstimator::ObservedSampleAverage ? "sample_average" : "normalized_points";
}
std::string scaling_name(Scaling s) { return s == Scaling::StandardScale ? "standard" : "none"; }

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

Json number(double v) {
  // Non-finite values have no JSON literal; keep them as strings.
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

double to_number(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return NAN;
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
  }
  throw Error(ErrorCode::ParseError, "expected a number in report");
}

Json config_to_json(const RunConfig& c) {
  Json j;
  j["diag_tol"] = c.diag_tol;
  j["abs_kl_tol"] = c.abs_kl_tol;
  j["rel_kl_tol"] = c.rel_kl_tol;
  j["max_epochs"] = c.max_epochs;
  j["bandwidth_rule"] = "scott";
  j["kl_estimator"] = estimator_name(c.kl_estimator);
  j["scaling"] = scaling_name(c.scaling);
  j["seed"] = c.seed;
  j["snapshot_epochs"] = c.snapshot_epochs;
  j["grid_per_dim"] = c.grid_per_dim;
  return j;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error(ErrorCode::InvalidValue, "cannot format number");
  return std::string(buf, ptr);
}

// ---- config ---------------------------------------------------------------

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  bool have_abs = false;
  std::set<std::string> seen;
  const auto lines = split_lines(text);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::size_t line_no = li + 1;
    std::string_view line = lines[li];
    if (const auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected key = value", line_no);
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view val = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": duplicate key " + key, line_no);
    }
    auto bad = [&](const std::string& why) {
      return Error(ErrorCode::InvalidValue, key + ": " + why + " (line " + std::to_string(line_no) + ")", line_no);
    };
    auto real = [&]() {
      auto v = parse_double(val);
      if (!v) throw bad("not a number");
      return *v;
    };
    auto count = [&]() {
      auto v = parse_u64(val);
      if (!v) throw bad("not a non-negative integer");
      return static_cast<std::size_t>(*v);
    };
    if (key == "abs_kl_tol") {
      cfg.abs_kl_tol = real();
      have_abs = true;
    } else if (key == "diag_tol") {
      cfg.diag_tol = real();
    } else if (key == "rel_kl_tol") {
      cfg.rel_kl_tol = real();
    } else if (key == "max_epochs") {
      cfg.max_epochs = count();
    } else if (key == "grid_per_dim") {
      cfg.grid_per_dim = count();
    } else if (key == "seed") {
      auto v = parse_u64(val);
      if (!v) throw bad("not an unsigned 64-bit integer");
      cfg.seed = *v;
    } else if (key == "bandwidth_rule") {
      if (val != "scott") throw bad("unknown bandwidth rule");
      cfg.bandwidth_rule = BandwidthRule::Scott;
    } else if (key == "kl_estimator") {
      if (val == "normalized_points") cfg.kl_estimator = KlEstimator::NormalizedObservedPoints;
      else if (val == "sample_average") cfg.kl_estimator = KlEstimator::ObservedSampleAverage;
      else throw bad("unknown estimator");
    } else if (key == "scaling") {
      if (val == "none") cfg.scaling = Scaling::None;
      else if (val == "standard") cfg.scaling = Scaling::StandardScale;
      else throw bad("unknown scaling");
    } else if (key == "snapshot_epochs") {
      cfg.snapshot_epochs.clear();
      if (!val.empty()) {
        for (auto part : split(val, ',')) {
          auto v = parse_u64(part);
          if (!v || *v == 0) throw bad("expected a comma list of positive epochs");
          cfg.snapshot_epochs.push_back(static_cast<std::size_t>(*v));
        }
      }
    } else {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": unknown key " + key, line_no);
    }
  }
  if (!have_abs) throw Error(ErrorCode::MissingRequiredField, "abs_kl_tol");
  cfg.validate();
  return cfg;
}

RunConfig load_config(const fs::path& path) { return parse_config(read_file(path)); }

std::string format_config(const RunConfig& c) {
  std::string s;
  s += "abs_kl_tol = " + format_double(c.abs_kl_tol) + "\n";
  s += "diag_tol = " + format_double(c.diag_tol) + "\n";
  s += "rel_kl_tol = " + format_double(c.rel_kl_tol) + "\n";
  s += "max_epochs = " + std::to_string(c.max_epochs) + "\n";
  s += "bandwidth_rule = scott\n";
  s += "kl_estimator = " + estimator_name(c.kl_estimator) + "\n";
  s += "scaling = " + scaling_name(c.scaling) + "\n";
  s += "seed = " + std::to_string(c.seed) + "\n";
  s += "snapshot_epochs = " + join_sizes(c.snapshot_epochs) + "\n";
  s += "grid_per_dim = " + std::to_string(c.grid_per_dim) + "\n";
  return s;
}

// ---- sample CSV -----------------------------------------------------------

CsvTable parse_samples_csv(std::string_view text, std::optional<std::size_t> expected_cols) {
  auto lines = split_lines(text);
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw Error(ErrorCode::HeaderMismatch, "missing header row", 1);
  CsvTable table;
  for (auto name : split(lines[0], ',')) table.header.emplace_back(trim(name));
  const std::size_t cols = table.header.size();
  for (std::size_t c = 0; c < cols; ++c) {
    if (table.header[c].empty()) throw Error(ErrorCode::HeaderMismatch, "empty column name", 1, c + 1);
  }
  if (expected_cols && *expected_cols != cols) {
    throw Error(ErrorCode::HeaderMismatch,
                "expected " + std::to_string(*expected_cols) + " columns, header has " + std::to_string(cols), 1);
  }
  table.data.resize(static_cast<Eigen::Index>(lines.size() - 1), static_cast<Eigen::Index>(cols));
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto cells = split(lines[li], ',');
    if (cells.size() != cols) {
      throw Error(ErrorCode::RaggedRow,
                  "line " + std::to_string(li + 1) + " has " + std::to_string(cells.size()) + " fields, expected " +
                      std::to_string(cols),
                  li + 1);
    }
    for (std::size_t c = 0; c < cols; ++c) {
      const auto v = parse_double(cells[c]);
      if (!v) {
        throw Error(ErrorCode::NonNumeric,
                    "line " + std::to_string(li + 1) + ", column " + std::to_string(c + 1) + ": '" +
                        std::string(trim(cells[c])) + "'",
                    li + 1, c + 1);
      }
      table.data(static_cast<Eigen::Index>(li - 1), static_cast<Eigen::Index>(c)) = *v;
    }
  }
  return table;
}

CsvTable load_samples_csv(const fs::path& path, std::optional<std::size_t> expected_cols) {
  return parse_samples_csv(read_file(path), expected_cols);
}

void write_samples_csv(const fs::path& path, const std::vector<std::string>& header, const Matrix& data) {
  if (header.size() != static_cast<std::size_t>(data.cols())) {
    throw Error(ErrorCode::DimensionMismatch, "header and data column counts differ");
  }
  std::string s;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) s += ',';
    s += header[c];
  }
  s += '\n';
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
      if (c) s += ',';
      s += format_double(data(r, c));
    }
    s += '\n';
  }
  write_file(path, s);
}

// ---- partition descriptor ---------------------------------------------------

std::string format_partition(const SubspacePartition& partition) {
  std::string s;
  for (const auto& g : partition.groups()) s += join_sizes(g) + "\n";
  return s;
}

SubspacePartition parse_partition(std::string_view text, std::size_t qoi_dim) {
  std::vector<std::vector<std::size_t>> groups;
  const auto lines = split_lines(text);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    std::string_view line = lines[li];
    if (const auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
    line = trim(line);
    if (line.empty()) continue;
    std::vector<std::size_t> g;
    for (auto part : split(line, ',')) {
      auto v = parse_u64(part);
      if (!v) throw Error(ErrorCode::ParseError, "partition line " + std::to_string(li + 1), li + 1);
      g.push_back(static_cast<std::size_t>(*v));
    }
    groups.push_back(std::move(g));
  }
  return SubspacePartition(std::move(groups), qoi_dim);
}

void write_partition(const fs::path& path, const SubspacePartition& partition) {
  write_file(path, format_partition(partition));
}

SubspacePartition read_partition(const fs::path& path, std::size_t qoi_dim) {
  return parse_partition(read_file(path), qoi_dim);
}

// ---- run report -------------------------------------------------------------

std::string report_to_json(const RunReport& r) {
  Json j;
  Json term;
  term["kind"] = to_string(r.termination.kind);
  term["epoch"] = r.termination.epoch;
  term["subspace"] = r.termination.subspace ? Json(*r.termination.subspace) : Json(nullptr);
  j["termination"] = term;
  j["epochs_run"] = r.epochs_run;
  Json iters = Json::array();
  for (const auto& it : r.per_iteration) {
    Json e;
    e["epoch"] = it.epoch;
    e["subspace"] = it.subspace_index;
    e["diagnostic"] = number(it.diagnostic_value);
    e["kl_after_update"] = number(it.kl_after_update);
    Json kls = Json::array();
    for (double v : it.per_subspace_kl_after_epoch) kls.push_back(number(v));
    e["per_subspace_kl_after_epoch"] = kls;
    iters.push_back(std::move(e));
  }
  j["per_iteration"] = std::move(iters);
  Json w = Json::array();
  for (Eigen::Index i = 0; i < r.final_weights.size(); ++i) w.push_back(number(r.final_weights[i]));
  j["final_weights"] = std::move(w);
  j["config_echo"] = config_to_json(r.config);
  j["seed"] = r.config.seed;
  j["limit_cycle_amplitude"] = number(r.limit_cycle_amplitude);
  return j.dump(1) + "\n";
}

RunReport report_from_json(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("report: ") + e.what());
  }
  try {
    RunReport r;
    const auto& term = j.at("termination");
    const auto kind = termination_from_string(term.at("kind").get<std::string>());
    if (!kind) throw Error(ErrorCode::ParseError, "report: unknown termination kind");
    r.termination.kind = *kind;
    r.termination.epoch = term.at("epoch").get<std::size_t>();
    if (!term.at("subspace").is_null()) r.termination.subspace = term.at("subspace").get<std::size_t>();
    r.epochs_run = j.at("epochs_run").get<std::size_t>();
    for (const auto& e : j.at("per_iteration")) {
      IterationRecord it;
      it.epoch = e.at("epoch").get<std::size_t>();
      it.subspace_index = e.at("subspace").get<std::size_t>();
      it.diagnostic_value = to_number(e.at("diagnostic"));
      it.kl_after_update = to_number(e.at("kl_after_update"));
      for (const auto& v : e.at("per_subspace_kl_after_epoch")) it.per_subspace_kl_after_epoch.push_back(to_number(v));
      r.per_iteration.push_back(std::move(it));
    }
    const auto& w = j.at("final_weights");
    r.final_weights.resize(static_cast<Eigen::Index>(w.size()));
    for (std::size_t i = 0; i < w.size(); ++i) r.final_weights[static_cast<Eigen::Index>(i)] = to_number(w[i]);
    const auto& c = j.at("config_echo");
    std::string cfg_text;
    cfg_text += "abs_kl_tol = " + format_double(to_number(c.at("abs_kl_tol"))) + "\n";
    cfg_text += "diag_tol = " + format_double(to_number(c.at("diag_tol"))) + "\n";
    cfg_text += "rel_kl_tol = " + format_double(to_number(c.at("rel_kl_tol"))) + "\n";
    cfg_text += "max_epochs = " + std::to_string(c.at("max_epochs").get<std::size_t>()) + "\n";
    cfg_text += "bandwidth_rule = " + c.at("bandwidth_rule").get<std::string>() + "\n";
    cfg_text += "kl_estimator = " + c.at("kl_estimator").get<std::string>() + "\n";
    cfg_text += "scaling = " + c.at("scaling").get<std::string>() + "\n";
    cfg_text += "seed = " + std::to_string(c.at("seed").get<std::uint64_t>()) + "\n";
    cfg_text += "snapshot_epochs = " + join_sizes(c.at("snapshot_epochs").get<std::vector<std::size_t>>()) + "\n";
    cfg_text += "grid_per_dim = " + std::to_string(c.at("grid_per_dim").get<std::size_t>()) + "\n";
    r.config = parse_config(cfg_text);
    r.limit_cycle_amplitude = to_number(j.at("limit_cycle_amplitude"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("report: ") + e.what());
  }
}

void write_report(const RunReport& report, const fs::path& path) { write_file(path, report_to_json(report)); }

RunReport read_report(const fs::path& path) { return report_from_json(read_file(path)); }

std::string summarize_report(const RunReport& r) {
  std::ostringstream s;
  s << "termination: " << to_string(r.termination.kind) << " in epoch " << r.termination.epoch;
  if (r.termination.subspace) s << " (subspace " << *r.termination.subspace << ")";
  s << "\nepochs run: " << r.epochs_run << "\niterations: " << r.per_iteration.size() << "\n";
  const auto kls = r.epoch_kls();
  if (!kls.empty()) {
    s << "final per-subspace KL:";
    for (double v : kls.back()) s << ' ' << format_double(v);
    s << "\n";
  }
  // Last diagnostic recorded per subspace.
  std::map<std::size_t, double> diag;
  for (const auto& it : r.per_iteration) diag[it.subspace_index] = it.diagnostic_value;
  if (!diag.empty()) {
    s << "final diagnostics:";
    for (const auto& [i, d] : diag) s << " s" << i << '=' << format_double(d);
    s << "\n";
  }
  s << "limit-cycle amplitude: " << format_double(r.limit_cycle_amplitude) << "\n";
  s << "seed: " << r.config.seed << "\n";
  return s.str();
}

// ---- plot series --------------------------------------------------------------

std::vector<fs::path> export_plot_series(const std::vector<EpochSnapshot>& snapshots,
                                         const std::vector<KlTraceEntry>& trace, const fs::path& out_dir) {
  ensure_dir(out_dir);
  std::vector<fs::path> written;
  for (const auto& snap : snapshots) {
    for (const auto& m : snap.marginals) {
      if (m.skipped) continue;
      std::vector<std::string> header;
      for (std::size_t d = 0; d < m.dim; ++d) header.push_back("x" + std::to_string(d + 1));
      header.emplace_back("pushforward_density");
      header.emplace_back("observed_density");
      Matrix data(m.grid.rows(), m.grid.cols() + 2);
      data << m.grid, m.pushforward_density, m.observed_density;
      const auto path = out_dir / ("marginal_e" + std::to_string(snap.epoch) + "_s" + std::to_string(m.subspace) + ".csv");
      write_samples_csv(path, header, data);
      written.push_back(path);
    }
  }
  std::string s = "iteration,subspace,kl\n";
  for (const auto& e : trace) {
    s += std::to_string(e.iteration) + "," + std::to_string(e.subspace) + "," + format_double(e.kl) + "\n";
  }
  const auto trace_path = out_dir / "kl_trace.csv";
  write_file(trace_path, s);
  written.push_back(trace_path);
  return written;
}

// ---- data directories ---------------------------------------------------------

namespace {
std::vector<std::string> column_names(const char* prefix, std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back(prefix + std::to_string(i + 1));
  return names;
}
}  // namespace

void write_generated(const GeneratedProblem& problem, const fs::path& dir) {
  ensure_dir(dir);
  const auto& s = problem.predicted;
  write_samples_csv(dir / "params.csv", column_names("lambda", s.p()), s.params());
  write_samples_csv(dir / "predicted_qoi.csv", column_names("q", s.d()), s.qoi());
  for (std::size_t j = 0; j < s.d(); ++j) {
    write_samples_csv(dir / ("observed_" + std::to_string(j + 1) + ".csv"), {"q" + std::to_string(j + 1)},
                      problem.observed_qoi.col(static_cast<Eigen::Index>(j)));
  }
  write_partition(dir / "partition.txt", problem.partition);
  write_partition(dir / "partition_joint.txt", problem.joint_partition);
}

DataBundle load_data_dir(const fs::path& dir) {
  auto params = load_samples_csv(dir / "params.csv");
  auto qoi = load_samples_csv(dir / "predicted_qoi.csv");
  const std::size_t d = qoi.header.size();
  std::vector<Matrix> cols;
  for (std::size_t j = 0; j < d; ++j) {
    cols.push_back(load_samples_csv(dir / ("observed_" + std::to_string(j + 1) + ".csv"), 1).data);
    if (cols.back().rows() != cols.front().rows()) {
      throw Error(ErrorCode::RowCountMismatch, "observed files differ in row count", j + 1);
    }
  }
  Matrix observed(cols.empty() ? 0 : cols.front().rows(), static_cast<Eigen::Index>(d));
  for (std::size_t j = 0; j < d; ++j) observed.col(static_cast<Eigen::Index>(j)) = cols[j].col(0);
  auto partition = read_partition(dir / "partition.txt", d);
  auto joint = fs::exists(dir / "partition_joint.txt")
                   ? read_partition(dir / "partition_joint.txt", d)
                   : SubspacePartition({[&] {
                                          std::vector<std::size_t> all(d);
                                          for (std::size_t j = 0; j < d; ++j) all[j] = j;
                                          return all;
                                        }()},
                                       d);
  return DataBundle{validate_sample_set(std::move(params.data), std::move(qoi.data)), std::move(observed),
                    std::move(partition), std::move(joint)};
}

GroupingChoice parse_grouping(std::string_view s) {
  if (s == "file") return GroupingChoice::File;
  if (s == "twelve1d" || s == "singletons") return GroupingChoice::Singletons;
  if (s == "joint") return GroupingChoice::Joint;
  if (s == "joint-product") return GroupingChoice::JointProduct;
  throw Error(ErrorCode::InvalidArgument, "unknown grouping '" + std::string(s) + "'");
}

RunOutput run_on_data(const RunConfig& cfg, const DataBundle& data, GroupingChoice grouping,
                      const std::optional<fs::path>& out_dir) {
  cfg.validate();
  const std::size_t d = data.samples.d();
  SubspacePartition partition = data.partition;
  Matrix observed_qoi = data.observed_qoi;
  switch (grouping) {
    case GroupingChoice::File: break;
    case GroupingChoice::Singletons: partition = SubspacePartition::singletons(d); break;
    case GroupingChoice::Joint: partition = data.joint_partition; break;
    case GroupingChoice::JointProduct: {
      partition = data.joint_partition;
      std::vector<Matrix> cols;
      for (Eigen::Index j = 0; j < observed_qoi.cols(); ++j) cols.emplace_back(observed_qoi.col(j));
      observed_qoi = product_of_marginals_observed(cols, cfg.seed);
      break;
    }
  }
  if (static_cast<std::size_t>(observed_qoi.cols()) != d) {
    throw Error(ErrorCode::DimensionMismatch, "observed and predicted QoI dimensions differ");
  }
  const auto subspaces = prepare_subspaces(data.samples, partition, observed_for_partition(observed_qoi, partition),
                                           cfg.scaling);

  std::vector<EpochSnapshot> snapshots;
  const bool exporting = out_dir.has_value();
  auto wanted = [&](std::size_t e) {
    return std::find(cfg.snapshot_epochs.begin(), cfg.snapshot_epochs.end(), e) != cfg.snapshot_epochs.end();
  };
  EpochObserver observer;
  if (exporting) {
    observer = [&](std::size_t epoch, const WeightVector& w) {
      if (wanted(epoch)) snapshots.push_back({epoch, epoch_marginal_snapshot(subspaces, w, cfg.grid_per_dim)});
    };
  }
  RunOutput out{run_iterative_dci(subspaces, data.samples.n(), cfg, observer), {}};
  if (exporting) {
    const std::size_t last = out.report.termination.epoch;
    if (snapshots.empty() || snapshots.back().epoch != last) {
      snapshots.push_back(
          {last, epoch_marginal_snapshot(subspaces, WeightVector(out.report.final_weights), cfg.grid_per_dim)});
    }
    ensure_dir(*out_dir);
    const auto report_path = *out_dir / "report.json";
    write_report(out.report, report_path);
    out.written = export_plot_series(snapshots, kl_trace(out.report), *out_dir);
    out.written.insert(out.written.begin(), report_path);
  }
  return out;
}

}  // namespace idci
