#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "idci/cli_io.hpp"
#include "idci/discrete_oracle.hpp"
#include "idci/error.hpp"
#include "idci/problems.hpp"

namespace {

using namespace idci;

std::vector<double> random_table(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> p(n);
  double sum = 0.0;
  for (double& v : p) sum += (v = u(rng));
  for (double& v : p) v /= sum;
  return p;
}

std::vector<CellMap> coordinate_maps(const std::vector<std::size_t>& shape) {
  std::vector<CellMap> maps;
  for (std::size_t a = 0; a < shape.size(); ++a) maps.push_back(coordinate_map(shape, a));
  return maps;
}

std::vector<DiscreteMarginal> marginals_of(const DiscreteJoint& j) {
  std::vector<DiscreteMarginal> obs;
  for (std::size_t i = 0; i < j.k(); ++i) obs.push_back(pushforward(j, i));
  return obs;
}

double max_marginal_error(const DiscreteJoint& j, const std::vector<DiscreteMarginal>& obs) {
  double err = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto m = pushforward(j, i);
    for (std::size_t c = 0; c < m.size(); ++c) err = std::max(err, std::abs(m.probs()[c] - obs[i].probs()[c]));
  }
  return err;
}

void demo_ipfp(const std::vector<std::size_t>& shape, bool uniform_start, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto maps = coordinate_maps(shape);
  std::size_t cells = 1;
  for (auto s : shape) cells *= s;
  const DiscreteJoint dg(shape, random_table(cells, rng), maps);
  const DiscreteJoint joint0 = uniform_start ? DiscreteJoint::uniform(shape, maps)
                                             : DiscreteJoint(shape, random_table(cells, rng), maps);
  const auto obs = marginals_of(dg);
  const auto res = iterate_discrete(joint0, obs);
  std::cout << "grid:";
  for (auto s : shape) std::cout << ' ' << s;
  std::cout << "\nepochs to limit: " << res.epochs << " (run " << res.epochs_run << ")\n";
  std::cout << "max marginal error: " << format_double(max_marginal_error(res.limit, obs)) << "\n";
  std::cout << "max pythagorean residual: " << format_double(pythagorean_residual(joint0, res.trajectory, dg)) << "\n";
  std::cout << "mutual absolute continuity: " << (mutual_ac_check(res.trajectory, joint0.k()) ? "pass" : "fail")
            << "\n";
  const auto ip = i_projection_check(joint0, obs, res.limit, 100, seed + 1);
  std::cout << "i-projection violation over " << ip.measures_checked
            << " feasible measures: " << format_double(ip.kl_violation) << "\n";
  if (ip.entropy_violation) std::cout << "max-entropy violation: " << format_double(*ip.entropy_violation) << "\n";
}

void demo_lemma1(std::uint64_t seed) {
  const FDivergenceKind kinds[] = {FDivergenceKind::KL, FDivergenceKind::TotalVariation, FDivergenceKind::ChiSquared};
  const std::vector<std::vector<std::size_t>> shapes = {{2, 2}, {2, 3}, {3, 4}};
  std::mt19937_64 rng(seed);
  for (const auto& shape : shapes) {
    const auto maps = coordinate_maps(shape);
    std::size_t cells = shape[0] * shape[1];
    const DiscreteJoint joint0(shape, random_table(cells, rng), maps);
    const DiscreteJoint dg(shape, random_table(cells, rng), maps);
    for (std::size_t i = 0; i < 2; ++i) {
      const auto obs = pushforward(dg, i);
      std::cout << shape[0] << 'x' << shape[1] << " map " << i << ": forward violation "
                << format_double(verify_forward_optimality(joint0, i, obs, 100, kinds, seed + i)) << ", backward violation "
                << format_double(verify_backward_optimality(joint0, i, obs, 100, seed + i)) << "\n";
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iterative data-consistent inversion"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "Generate a built-in problem data directory");
  std::string problem;
  std::size_t n = 1000, p = 100;
  std::uint64_t seed = 0;
  std::string out_dir;
  gen->add_option("--problem", problem, "Problem name")
      ->required()
      ->check(CLI::IsMember({"linear2d", "linear2d-3q", "highdim"}));
  gen->add_option("--n", n, "Sample count")->required();
  gen->add_option("--seed", seed, "RNG seed");
  gen->add_option("--p", p, "Parameter dimension (highdim)");
  gen->add_option("--out", out_dir, "Output directory")->required();

  auto* run = app.add_subcommand("run", "Run the iterative scheme on a data directory");
  std::string config_path, data_dir, grouping = "file", run_out;
  run->add_option("--config", config_path, "Config file")->required();
  run->add_option("--data", data_dir, "Data directory")->required();
  run->add_option("--grouping", grouping, "file | twelve1d | singletons | joint | joint-product");
  run->add_option("--out", run_out, "Output directory (default <data>/run)");

  auto* oracle = app.add_subcommand("oracle", "Discrete oracle demonstrations");
  std::string demo;
  oracle->add_option("--demo", demo, "Demo name")->required()->check(CLI::IsMember({"ipfp2", "ipfp3", "lemma1"}));
  oracle->add_option("--seed", seed, "RNG seed");

  auto* rep = app.add_subcommand("report", "Summarize a run report");
  std::string report_path;
  rep->add_option("--in", report_path, "Report file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Error& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      if (n < 2) throw Error(ErrorCode::TooFewSamples, "--n must be at least 2");
      GeneratedProblem g = problem == "highdim"
                               ? gen_highdim_surrogate(n, p, seed, Grouping::Twelve1D)
                               : gen_linear2d(n, seed, problem == "linear2d" ? Linear2dVariant::TwoQoI
                                                                             : Linear2dVariant::ThreeQoI);
      write_generated(g, out_dir);
      std::cout << "wrote " << g.predicted.n() << " samples (" << g.predicted.p() << " parameters, "
                << g.predicted.d() << " QoI) to " << out_dir << "\n";
      return 0;
    }
    if (run->parsed()) {
      const RunConfig cfg = load_config(config_path);
      const DataBundle data = load_data_dir(data_dir);
      const std::filesystem::path out = run_out.empty() ? std::filesystem::path(data_dir) / "run" : std::filesystem::path(run_out);
      const auto result = run_on_data(cfg, data, parse_grouping(grouping), out);
      std::cout << summarize_report(result.report);
      std::cout << "report: " << (out / "report.json").string() << "\n";
      return result.report.termination.kind == TerminationKind::DiagnosticViolated ? 2 : 0;
    }
    if (oracle->parsed()) {
      if (demo == "ipfp2") demo_ipfp({4, 4}, false, seed);
      else if (demo == "ipfp3") demo_ipfp({3, 3, 3}, true, seed);
      else demo_lemma1(seed);
      return 0;
    }
    if (rep->parsed()) {
      std::cout << summarize_report(read_report(report_path));
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
