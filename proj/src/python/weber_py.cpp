#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "weber/activation.hpp"
#include "weber/causal.hpp"
#include "weber/corpus.hpp"
#include "weber/error.hpp"
#include "weber/geometry.hpp"
#include "weber/records.hpp"
#include "weber/report.hpp"
#include "weber/stimulus.hpp"

namespace py = pybind11;
using namespace weber;
using nlohmann::json;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

py::tuple read_wbract_py(const std::filesystem::path& path) {
  auto block = read_wbract(path);
  FloatArray out({block.layers, block.rows, block.dim});
  std::memcpy(out.mutable_data(), block.tensor.data(), block.tensor.size() * sizeof(float));
  return py::make_tuple(out, block.manifest.dump());
}

py::bytes encode_wbract_py(const FloatArray& tensor, const std::string& manifest) {
  if (tensor.ndim() != 3) throw Error(Errc::shape_mismatch, "tensor must be [layers, rows, dim]");
  WbractBlock b;
  b.layers = static_cast<std::uint32_t>(tensor.shape(0));
  b.rows = static_cast<std::uint32_t>(tensor.shape(1));
  b.dim = static_cast<std::uint32_t>(tensor.shape(2));
  b.tensor.assign(tensor.data(), tensor.data() + tensor.size());
  b.manifest = json::parse(manifest);
  return py::bytes(encode_wbract(b));
}

std::string validate_activations_py(const std::filesystem::path& path) {
  const auto acts = read_activation_file(path);
  json icc = json::array();
  for (std::size_t l = 0; l < acts.n_layers(); ++l) icc.push_back(carrier_icc(acts, l).icc);
  return json{{"n_layers", acts.n_layers()}, {"n_stimuli", acts.n_stimuli()}, {"dim", acts.dim()}, {"icc", icc}}
      .dump();
}

std::string validate_trials_py(const std::string& jsonl) {
  const auto t = parse_trials(jsonl);
  return json{{"n_records", t.n_records}, {"n_invalid", t.n_invalid}, {"exclusion_fraction", t.exclusion_fraction}}
      .dump();
}

std::string analyze_geometry_py(const std::filesystem::path& path, const std::vector<std::string>& metrics,
                                int permutations, std::uint64_t seed) {
  std::vector<geometry::Metric> ms;
  for (const auto& m : metrics) ms.push_back(geometry::parse_metric(m));
  report::DomainResults d;
  d.domain = path.stem().string();
  report::analyze_geometry_into(d, read_activation_file(path), ms, permutations, seed);
  return report::to_json(d).dump();
}

std::string analyze_behaviour_py(const std::string& jsonl, int bootstrap, std::uint64_t seed) {
  report::DomainResults d;
  d.domain = "behaviour";
  d.behaviour = report::summarize_behaviour(parse_trials(jsonl), bootstrap, seed);
  return report::to_json(d)["behaviour"].dump();
}

std::string analyze_patch_py(const std::string& jsonl, int sign) {
  return causal::to_json(causal::analyze_patch_results(parse_patch_results(jsonl), sign)).dump();
}

std::string corpus_fit_py(const std::string& text) {
  const auto h = corpus::extract_integer_counts(text);
  return json{{"histogram", corpus::to_json(h)}, {"fit", corpus::to_json(corpus::fit_magnitude_distribution(h))}}
      .dump();
}

py::dict read_patch_plan_py(const std::filesystem::path& path) {
  const auto plan = causal::plan_from_wbract(read_wbract(path));
  const std::size_t dim = plan.mag.unit_vector.size();
  py::array_t<double> offsets({plan.n_directions(), plan.doses.size(), dim});
  auto* out = offsets.mutable_data();
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < plan.n_directions(); ++i) {
    ids.push_back(plan.direction_id(i));
    for (std::size_t k = 0; k < plan.doses.size(); ++k) {
      const auto v = plan.offset(i, plan.doses[k]);
      std::memcpy(out + (i * plan.doses.size() + k) * dim, v.data(), dim * sizeof(double));
    }
  }
  py::dict d;
  d["layer"] = plan.layer;
  d["position"] = plan.position;
  d["doses"] = plan.doses;
  d["prompt_ids"] = plan.prompt_ids;
  d["direction_ids"] = ids;
  d["offsets"] = offsets;
  d["planned_runs"] = plan.planned_runs();
  return d;
}

std::string run_all_py(const std::filesystem::path& config, const std::filesystem::path& out) {
  const auto r = report::run_all(report::Config::load(config));
  report::emit_report(r, out);
  return report::report_json(r).dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "weber analysis engine";

  static py::exception<Error> weber_error(m, "WeberError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(weber_error, e.what());
    }
  });

  m.def(
      "pairs_jsonl",
      [](const std::string& domain, const std::string& task, std::uint64_t seed, bool labelled) {
        const auto d = stimulus::parse_domain(domain);
        const auto t = stimulus::parse_task(task);
        return stimulus::pairs_jsonl(d, t, seed, labelled, stimulus::build_comparison_pairs(d, t, seed));
      },
      py::arg("domain"), py::arg("task") = "B1", py::arg("seed") = 42, py::arg("labelled") = true);
  m.def(
      "probes_jsonl",
      [](const std::string& domain) {
        const auto d = stimulus::parse_domain(domain);
        return stimulus::probes_jsonl(d, stimulus::build_probe_set(d));
      },
      py::arg("domain"));
  m.def("read_wbract", &read_wbract_py, py::arg("path"));
  m.def("encode_wbract", &encode_wbract_py, py::arg("tensor"), py::arg("manifest"));
  m.def("validate_activations", &validate_activations_py, py::arg("path"));
  m.def("validate_trials", &validate_trials_py, py::arg("jsonl"));
  m.def(
      "validate_patch_results", [](const std::string& jsonl) { return parse_patch_results(jsonl).size(); },
      py::arg("jsonl"));
  m.def("analyze_geometry", &analyze_geometry_py, py::arg("path"),
        py::arg("metrics") = std::vector<std::string>{"cosine", "euclidean"}, py::arg("permutations") = 2000,
        py::arg("seed") = 42);
  m.def("analyze_behaviour", &analyze_behaviour_py, py::arg("jsonl"), py::arg("bootstrap") = 1000,
        py::arg("seed") = 42);
  m.def("analyze_patch", &analyze_patch_py, py::arg("jsonl"), py::arg("sign") = 1);
  m.def("corpus_fit", &corpus_fit_py, py::arg("text"));
  m.def("read_patch_plan", &read_patch_plan_py, py::arg("path"));
  m.def("run_all", &run_all_py, py::arg("config"), py::arg("out"));
}
