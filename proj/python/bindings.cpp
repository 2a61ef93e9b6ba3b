#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "idci/cli_io.hpp"
#include "idci/dci.hpp"
#include "idci/density.hpp"
#include "idci/discrete_oracle.hpp"
#include "idci/divergence.hpp"
#include "idci/error.hpp"
#include "idci/iterate.hpp"
#include "idci/problems.hpp"

namespace py = pybind11;
using namespace idci;

namespace {

py::dict problem_dict(const GeneratedProblem& g) {
  py::dict d;
  d["name"] = g.spec.name;
  d["params"] = g.predicted.params();
  d["qoi"] = g.predicted.qoi();
  d["observed_qoi"] = g.observed_qoi;
  d["observed"] = g.observed;
  d["partition"] = g.partition.groups();
  d["joint_partition"] = g.joint_partition.groups();
  return d;
}

std::vector<CellMap> maps_for(const std::vector<std::size_t>& shape, const std::vector<std::vector<std::size_t>>& axes) {
  std::vector<CellMap> maps;
  for (const auto& a : axes) maps.push_back(axes_map(shape, a));
  return maps;
}

}  // namespace

PYBIND11_MODULE(_idci, m) {
  m.doc() = "Iterative data-consistent inversion";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> exc_storage;
  exc_storage.call_once_and_store_result([&]() { return py::object(py::exception<Error>(m, "IdciError")); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const py::object& type = exc_storage.get_stored();
      py::object err = type(e.what());
      err.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(type.ptr(), err.ptr());
    }
  });

  py::enum_<KlEstimator>(m, "KlEstimator")
      .value("ObservedSampleAverage", KlEstimator::ObservedSampleAverage)
      .value("NormalizedObservedPoints", KlEstimator::NormalizedObservedPoints);
  py::enum_<Scaling>(m, "Scaling").value("None_", Scaling::None).value("StandardScale", Scaling::StandardScale);
  py::enum_<FDivergenceKind>(m, "FDivergenceKind")
      .value("KL", FDivergenceKind::KL)
      .value("TotalVariation", FDivergenceKind::TotalVariation)
      .value("ChiSquared", FDivergenceKind::ChiSquared);

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("diag_tol", &RunConfig::diag_tol)
      .def_readwrite("abs_kl_tol", &RunConfig::abs_kl_tol)
      .def_readwrite("rel_kl_tol", &RunConfig::rel_kl_tol)
      .def_readwrite("max_epochs", &RunConfig::max_epochs)
      .def_readwrite("kl_estimator", &RunConfig::kl_estimator)
      .def_readwrite("scaling", &RunConfig::scaling)
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("snapshot_epochs", &RunConfig::snapshot_epochs)
      .def_readwrite("grid_per_dim", &RunConfig::grid_per_dim)
      .def("validate", &RunConfig::validate);
  m.def("parse_config", &parse_config, py::arg("text"));

  py::class_<IterationRecord>(m, "IterationRecord")
      .def_readonly("epoch", &IterationRecord::epoch)
      .def_readonly("subspace_index", &IterationRecord::subspace_index)
      .def_readonly("diagnostic_value", &IterationRecord::diagnostic_value)
      .def_readonly("kl_after_update", &IterationRecord::kl_after_update)
      .def_readonly("per_subspace_kl_after_epoch", &IterationRecord::per_subspace_kl_after_epoch);

  py::class_<RunReport>(m, "RunReport")
      .def_property_readonly("termination", [](const RunReport& r) { return to_string(r.termination.kind); })
      .def_property_readonly("termination_epoch", [](const RunReport& r) { return r.termination.epoch; })
      .def_property_readonly("termination_subspace", [](const RunReport& r) { return r.termination.subspace; })
      .def_readonly("epochs_run", &RunReport::epochs_run)
      .def_readonly("per_iteration", &RunReport::per_iteration)
      .def_readonly("final_weights", &RunReport::final_weights)
      .def_readonly("limit_cycle_amplitude", &RunReport::limit_cycle_amplitude)
      .def("epoch_kls", &RunReport::epoch_kls)
      .def("to_json", [](const RunReport& r) { return report_to_json(r); });
  m.def("report_from_json", &report_from_json, py::arg("text"));

  m.def(
      "run_iterative_dci",
      [](Matrix params, Matrix qoi, std::vector<std::vector<std::size_t>> partition, std::vector<Matrix> observed,
         const RunConfig& cfg) {
        const auto samples = validate_sample_set(std::move(params), std::move(qoi));
        const SubspacePartition part(std::move(partition), samples.d());
        py::gil_scoped_release release;
        return run_iterative_dci(samples, part, observed, cfg);
      },
      py::arg("params"), py::arg("qoi"), py::arg("partition"), py::arg("observed"), py::arg("config"));

  py::class_<GaussianKde>(m, "GaussianKde")
      .def_property_readonly("bandwidth", &GaussianKde::bandwidth)
      .def_property_readonly("weights", &GaussianKde::weights)
      .def("log_density", &GaussianKde::log_density, py::arg("query"));
  m.def(
      "fit_kde", [](const Matrix& points, std::optional<Vector> w) {
        return w ? fit_kde(points, WeightVector(*w)) : fit_kde(points);
      },
      py::arg("points"), py::arg("weights") = py::none());
  m.def("scott_bandwidth", &scott_bandwidth, py::arg("points"), py::arg("unit_sum_weights"));

  m.def(
      "compute_update_ratios",
      [](const Matrix& pred, const Vector& w, const Matrix& obs) { return compute_update_ratios(pred, WeightVector(w), obs); },
      py::arg("predicted_qoi"), py::arg("weights"), py::arg("observed_qoi"));
  m.def(
      "apply_update",
      [](const Vector& w, const Vector& r) {
        const auto s = apply_update(WeightVector(w), r);
        return py::make_tuple(Vector(s.new_weights.values()), s.diagnostic);
      },
      py::arg("weights"), py::arg("ratios"));

  m.def(
      "f_divergence",
      [](const std::vector<double>& p, const std::vector<double>& q, FDivergenceKind kind) {
        return f_divergence_discrete(p, q, kind);
      },
      py::arg("p"), py::arg("q"), py::arg("kind"));
  m.def("gaussian_kl", &gaussian_kl_closed_form, py::arg("mu0"), py::arg("cov0"), py::arg("mu1"), py::arg("cov1"));

  m.def(
      "gen_linear2d",
      [](std::size_t n, std::uint64_t seed, bool three_qoi) {
        return problem_dict(gen_linear2d(n, seed, three_qoi ? Linear2dVariant::ThreeQoI : Linear2dVariant::TwoQoI));
      },
      py::arg("n"), py::arg("seed"), py::arg("three_qoi") = false);
  m.def(
      "gen_highdim",
      [](std::size_t n, std::size_t p, std::uint64_t seed, bool joint) {
        return problem_dict(
            gen_highdim_surrogate(n, p, seed, joint ? Grouping::FourJoint2DPlusFour1D : Grouping::Twelve1D));
      },
      py::arg("n"), py::arg("p") = 100, py::arg("seed") = 0, py::arg("joint") = false);
  m.def("product_of_marginals", &product_of_marginals_observed, py::arg("observed"), py::arg("seed"));

  m.def(
      "iterate_discrete",
      [](std::vector<std::size_t> shape, std::vector<double> probs0, std::vector<std::vector<std::size_t>> axes,
         std::vector<std::vector<double>> obs, std::size_t max_epochs, double tv_tol) {
        const DiscreteJoint j0(shape, std::move(probs0), maps_for(shape, axes));
        std::vector<DiscreteMarginal> o;
        for (auto& v : obs) o.emplace_back(std::move(v));
        const auto res = iterate_discrete(j0, o, max_epochs, tv_tol, false);
        py::dict d;
        d["limit"] = res.limit.probs();
        d["epochs"] = res.epochs;
        d["epochs_run"] = res.epochs_run;
        d["tv_history"] = res.tv_history;
        return d;
      },
      py::arg("shape"), py::arg("probs0"), py::arg("axes"), py::arg("observed"),
      py::arg("max_epochs") = kDefaultMaxEpochs, py::arg("tv_tol") = kDefaultTvTol);
  m.def(
      "discrete_pushforward",
      [](std::vector<std::size_t> shape, std::vector<double> probs, std::vector<std::size_t> axes) {
        const DiscreteJoint j(shape, std::move(probs), {axes_map(shape, axes)});
        return pushforward(j, 0).probs();
      },
      py::arg("shape"), py::arg("probs"), py::arg("axes"));
}
