#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "idci/cli_io.hpp"
#include "idci/error.hpp"
#include "property.hpp"

using namespace idci;
namespace fs = std::filesystem;

namespace {
template <class F>
Error error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  FAIL("no idci::Error thrown");
  return Error(ErrorCode::InvalidArgument, "unreachable");
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("idci_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}
}  // namespace

TEST_CASE("config defaults and errors") {
  const RunConfig c = parse_config("abs_kl_tol = 1e-7\n");
  CHECK(c.abs_kl_tol == 1e-7);
  CHECK(c.diag_tol == 0.1);
  CHECK(c.rel_kl_tol == 1e-2);
  CHECK(c.max_epochs == 100);
  CHECK(error_of([] { parse_config(""); }).code() == ErrorCode::MissingRequiredField);
  CHECK(error_of([] { parse_config("abs_kl_tol = -1\n"); }).code() == ErrorCode::InvalidValue);
  const auto e = error_of([] { parse_config("abs_kl_tol = 1e-7\n# comment\nnonsense line\n"); });
  CHECK(e.code() == ErrorCode::ParseError);
  CHECK(e.row() == 3);
  CHECK(error_of([] { parse_config("abs_kl_tol = 1e-7\nbogus = 1\n"); }).code() == ErrorCode::ParseError);
  CHECK(error_of([] { parse_config("abs_kl_tol = 1e-7\nmax_epochs = many\n"); }).code() == ErrorCode::InvalidValue);
  CHECK(error_of([] { parse_config("abs_kl_tol = 1e-7\nabs_kl_tol = 1e-6\n"); }).code() == ErrorCode::ParseError);

  const RunConfig full = parse_config(
      "abs_kl_tol=1e-6 # inline\n diag_tol = 0.2\nrel_kl_tol=0.05\nmax_epochs=7\nseed=18446744073709551615\n"
      "kl_estimator = sample_average\nscaling = standard\nsnapshot_epochs = 2,3\ngrid_per_dim = 11\n");
  CHECK(full.diag_tol == 0.2);
  CHECK(full.max_epochs == 7);
  CHECK(full.seed == std::numeric_limits<std::uint64_t>::max());
  CHECK(full.kl_estimator == KlEstimator::ObservedSampleAverage);
  CHECK(full.scaling == Scaling::StandardScale);
  CHECK(full.snapshot_epochs == std::vector<std::size_t>{2, 3});
  CHECK(parse_config(format_config(full)) == full);
}

TEST_CASE("sample csv examples") {
  const auto t = parse_samples_csv("q1,q2\n1.0,2.0\n");
  CHECK(t.header == std::vector<std::string>{"q1", "q2"});
  CHECK(t.data.rows() == 1);
  CHECK(t.data(0, 1) == 2.0);
  const auto ragged = error_of([] { parse_samples_csv("a,b\n1,2\n3\n"); });
  CHECK(ragged.code() == ErrorCode::RaggedRow);
  CHECK(ragged.row() == 3);
  const auto nn = error_of([] { parse_samples_csv("q1\nabc\n"); });
  CHECK(nn.code() == ErrorCode::NonNumeric);
  CHECK(nn.row() == 2);
  CHECK(nn.col() == 1);
  CHECK(error_of([] { parse_samples_csv("a,b\n1,2\n", 3); }).code() == ErrorCode::HeaderMismatch);
  CHECK(error_of([] { parse_samples_csv(""); }).code() == ErrorCode::HeaderMismatch);
  CHECK(parse_samples_csv("a\r\n-1.5e3\r\n+2\r\n").data(1, 0) == 2.0);
}

TEST_CASE("number formatting round trips") {
  prop::for_all(71, [](std::mt19937_64& rng) {
    const double v = std::ldexp(prop::uniform(rng, -1, 1), static_cast<int>(prop::index(rng, 0, 200)) - 100);
    const auto t = parse_samples_csv("x\n" + format_double(v) + "\n");
    CHECK(t.data(0, 0) == v);
  });
}

TEST_CASE("csv write and read are inverse") {
  const fs::path dir = scratch("csv");
  std::mt19937_64 rng(3);
  const Matrix m = prop::normal_matrix(rng, 20, 3, 1e3);
  write_samples_csv(dir / "m.csv", {"a", "b", "c"}, m);
  const auto t = load_samples_csv(dir / "m.csv", 3);
  CHECK(t.data == m);
  CHECK(error_of([&] { load_samples_csv(dir / "missing.csv"); }).code() == ErrorCode::IoError);
}

TEST_CASE("partition descriptor round trip") {
  const SubspacePartition p({{0, 1}, {2}, {1, 3}}, 4);
  CHECK(parse_partition(format_partition(p), 4) == p);
  CHECK(error_of([] { parse_partition("0,x\n", 2); }).code() == ErrorCode::ParseError);
}

TEST_CASE("report round trip and plot export") {
  const fs::path dir = scratch("report");
  const auto g = gen_linear2d(300, 2, Linear2dVariant::TwoQoI);
  write_generated(g, dir / "data");
  const DataBundle data = load_data_dir(dir / "data");
  CHECK(data.samples.params() == g.predicted.params());
  CHECK(data.observed_qoi == g.observed_qoi);
  CHECK(data.partition == g.partition);

  RunConfig c = parse_config("abs_kl_tol = 1e-7\nmax_epochs = 1\nsnapshot_epochs = 1\ngrid_per_dim = 21\n");
  const auto out = run_on_data(c, data, GroupingChoice::File, dir / "run");
  CHECK(out.report.epochs_run == 1);
  CHECK(count_lines(dir / "run" / "kl_trace.csv") == 3);  // header + 2 rows
  CHECK(fs::exists(dir / "run" / "marginal_e1_s0.csv"));
  CHECK(fs::exists(dir / "run" / "marginal_e1_s1.csv"));
  CHECK(count_lines(dir / "run" / "marginal_e1_s0.csv") == 22);

  const RunReport back = read_report(dir / "run" / "report.json");
  CHECK(back == out.report);
  CHECK(report_to_json(back) == report_to_json(out.report));

  // Default snapshots {1, 5} plus the final epoch.
  c.max_epochs = 100;
  c.snapshot_epochs = {1, 5};
  const auto full = run_on_data(c, data, GroupingChoice::File, dir / "run2");
  std::size_t marginal_files = 0;
  for (const auto& p : full.written) marginal_files += p.filename().string().rfind("marginal_", 0) == 0;
  const std::size_t epochs = full.report.termination.epoch;
  CHECK(marginal_files == 2 * (epochs > 5 ? 3 : (epochs == 1 ? 1 : 2)));

  // Same inputs give byte-identical reports.
  const auto again = run_on_data(c, data, GroupingChoice::File, dir / "run3");
  std::ifstream a(dir / "run2" / "report.json"), b(dir / "run3" / "report.json");
  CHECK(std::string(std::istreambuf_iterator<char>(a), {}) == std::string(std::istreambuf_iterator<char>(b), {}));
}

TEST_CASE("diagnostic failure report round trip") {
  const auto g = gen_linear2d(300, 0, Linear2dVariant::TwoQoI);
  const fs::path dir = scratch("fail");
  write_generated(g, dir);
  const auto out = run_on_data(parse_config("abs_kl_tol = 1e-7\n"), load_data_dir(dir), GroupingChoice::JointProduct,
                               std::nullopt);
  CHECK(out.report.termination.kind == TerminationKind::DiagnosticViolated);
  CHECK(report_from_json(report_to_json(out.report)) == out.report);
  CHECK(summarize_report(out.report).find("DiagnosticViolated") != std::string::npos);
  CHECK(error_of([] { report_from_json("{"); }).code() == ErrorCode::ParseError);
  CHECK(error_of([] { parse_grouping("sideways"); }).code() == ErrorCode::InvalidArgument);
}
