#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "hsunmix/errors.hpp"
#include "hsunmix/graph.hpp"
#include "hsunmix/io.hpp"
#include "hsunmix/metrics.hpp"
#include "hsunmix/scene.hpp"
#include "hsunmix/solver.hpp"
#include "hsunmix/subspace.hpp"
#include "hsunmix/types.hpp"
#include "hsunmix/version.hpp"

namespace py = pybind11;
using namespace hsunmix;

PYBIND11_MODULE(_core, m) {
  m.doc() = "hyperspectral unmixing core (NMF/GNMF, scene simulation, metrics)";
  m.attr("__version__") = kVersion;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  py::class_<SpectralLibrary>(m, "SpectralLibrary")
      .def_readonly("wavelengths", &SpectralLibrary::wavelengths)
      .def_readonly("names", &SpectralLibrary::names)
      .def_readonly("reflectance", &SpectralLibrary::reflectance)
      .def("signature", &SpectralLibrary::signature, py::arg("name"));

  py::class_<LabelMap>(m, "LabelMap")
      .def_readonly("rows", &LabelMap::rows)
      .def_readonly("cols", &LabelMap::cols)
      .def_readonly("class_count", &LabelMap::class_count)
      .def_readonly("labels", &LabelMap::labels)
      .def("at", &LabelMap::at, py::arg("r"), py::arg("c"));

  py::class_<SceneConfig>(m, "SceneConfig")
      .def(py::init([](int scale_factor, double filter_sigma, double snr_db,
                       std::uint64_t seed, std::vector<std::string> material_names,
                       std::string label_map_path) {
             SceneConfig cfg;
             cfg.scale_factor = scale_factor;
             cfg.filter_sigma = filter_sigma;
             cfg.snr_db = snr_db;
             cfg.seed = seed;
             cfg.material_names = std::move(material_names);
             cfg.label_map_path = std::move(label_map_path);
             return cfg;
           }),
           py::arg("scale_factor") = 3, py::arg("filter_sigma") = 0.5,
           py::arg("snr_db") = 30.0, py::arg("seed") = 0,
           py::arg("material_names") = std::vector<std::string>{},
           py::arg("label_map_path") = std::string{})
      .def_readwrite("scale_factor", &SceneConfig::scale_factor)
      .def_readwrite("filter_sigma", &SceneConfig::filter_sigma)
      .def_readwrite("snr_db", &SceneConfig::snr_db)
      .def_readwrite("seed", &SceneConfig::seed)
      .def_readwrite("material_names", &SceneConfig::material_names)
      .def_readwrite("label_map_path", &SceneConfig::label_map_path);

  py::class_<NoiseStats>(m, "NoiseStats")
      .def_readonly("target_snr_db", &NoiseStats::target_snr_db)
      .def_readonly("realized_snr_db", &NoiseStats::realized_snr_db)
      .def_readonly("clamped_fraction", &NoiseStats::clamped_fraction);

  py::class_<SimulatedScene>(m, "SimulatedScene")
      .def_readonly("observed", &SimulatedScene::observed)
      .def_readonly("true_endmembers", &SimulatedScene::true_endmembers)
      .def_readonly("true_abundances", &SimulatedScene::true_abundances)
      .def_readonly("low_rows", &SimulatedScene::low_rows)
      .def_readonly("low_cols", &SimulatedScene::low_cols)
      .def_readonly("noise_stats", &SimulatedScene::noise_stats);

  py::enum_<Weighting>(m, "Weighting")
      .value("BINARY", Weighting::kBinary)
      .value("HEAT_KERNEL", Weighting::kHeatKernel)
      .value("DOT_PRODUCT", Weighting::kDotProduct);

  py::class_<WeightGraph>(m, "WeightGraph")
      .def_readonly("n", &WeightGraph::n)
      .def_readonly("weighting", &WeightGraph::weighting)
      .def_readonly("construction", &WeightGraph::construction)
      .def_property_readonly("edge_count",
                             [](const WeightGraph& g) { return g.weights.nonZeros() / 2; })
      .def("weights_dense",
           [](const WeightGraph& g) { return Matrix(g.weights); });

  py::class_<Factorization>(m, "Factorization")
      .def_readonly("endmembers", &Factorization::endmembers)
      .def_readonly("abundances", &Factorization::abundances)
      .def_readonly("objective_trace", &Factorization::objective_trace)
      .def_readonly("iterations_run", &Factorization::iterations_run)
      .def_readonly("converged", &Factorization::converged)
      .def_readonly("degenerate_rows", &Factorization::degenerate_rows);

  py::class_<PcaSpectrum>(m, "PcaSpectrum")
      .def_readonly("eigenvalues", &PcaSpectrum::eigenvalues)
      .def_readonly("explained", &PcaSpectrum::explained)
      .def_readonly("centered", &PcaSpectrum::centered);

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("method_label", &EvalReport::method_label)
      .def_readonly("permutation", &EvalReport::permutation)
      .def_readonly("per_endmember_sad_deg", &EvalReport::per_endmember_sad_deg)
      .def_readonly("rms_sad_deg", &EvalReport::rms_sad_deg)
      .def_readonly("rms_aad_deg", &EvalReport::rms_aad_deg)
      .def_readonly("aad_degenerate_pixels", &EvalReport::aad_degenerate_pixels);

  m.def("load_spectral_library",
        [](const std::string& p) { return load_spectral_library(p); }, py::arg("path"));
  m.def("load_label_map", [](const std::string& p) { return load_label_map(p); },
        py::arg("path"));
  m.def("load_matrix", [](const std::string& p) { return load_matrix(p); },
        py::arg("path"));
  m.def("save_matrix",
        [](const std::string& p, const Matrix& x) { save_matrix(p, x); },
        py::arg("path"), py::arg("matrix"));

  m.def("gaussian_kernel", &gaussian_kernel, py::arg("size"), py::arg("sigma"));
  m.def("simulate", &simulate, py::arg("config"), py::arg("library"), py::arg("labels"));

  m.def("build_spatial_graph", &build_spatial_graph, py::arg("rows"), py::arg("cols"),
        py::arg("connectivity") = 4);
  m.def("build_knn_graph", &build_knn_graph, py::arg("X"), py::arg("p"),
        py::arg("weighting") = Weighting::kBinary,
        py::arg("sigma_h") = std::optional<double>{});

  m.def(
      "solve",
      [](const Matrix& X, const WeightGraph* graph, int p, double lambda, int max_iter,
         double tol, std::uint64_t seed, bool asc) {
        SolverOptions opts;
        opts.p_endmembers = p;
        opts.lambda = lambda;
        opts.max_iter = max_iter;
        opts.rel_tol = tol;
        opts.seed = seed;
        opts.asc = asc;
        return solve(X, graph, opts);
      },
      py::arg("X"), py::arg("graph") = nullptr, py::arg("p") = 0,
      py::arg("lam") = 0.0, py::arg("max_iter") = 1000, py::arg("tol") = 1e-6,
      py::arg("seed") = 0, py::arg("asc") = true);

  m.def("pca_spectrum", &pca_spectrum, py::arg("X"), py::arg("centered") = true);
  m.def("estimate_endmember_count", &estimate_endmember_count, py::arg("X"),
        py::arg("threshold") = 0.995, py::arg("centered") = true);

  m.def("sad", &sad, py::arg("a"), py::arg("b"));
  m.def(
      "aad", [](const Vector& a, const Vector& b) { return aad(a, b, nullptr); },
      py::arg("a"), py::arg("b"));
  m.def("match_endmembers", &match_endmembers, py::arg("U_true"), py::arg("U_est"));
  m.def("evaluate", &evaluate, py::arg("U_true"), py::arg("V_true"), py::arg("U_est"),
        py::arg("V_est"), py::arg("label") = std::string{});
}
