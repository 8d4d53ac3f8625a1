#include "hsunmix/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hsunmix/errors.hpp"
#include "hsunmix/io.hpp"
#include "hsunmix/metrics.hpp"
#include "hsunmix/scene.hpp"
#include "hsunmix/solver.hpp"
#include "hsunmix/subspace.hpp"
#include "hsunmix/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace hsunmix {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os.write(content.data(), static_cast<std::streamsize>(content.size()))) {
    throw ConfigError(path.string() + ": write failed");
  }
}

void write_json(const fs::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

json read_json(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError(path.string() + ": cannot open");
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError(dir.string() + ": cannot create directory (" + ec.message() + ")");
}

// ---------------------------------------------------------------------------
// SceneConfig JSON (keys exactly: scale_factor, filter_sigma, snr_db, seed,
// material_names, label_map_path)

json scene_config_to_json(const SceneConfig& cfg) {
  json j;
  j["scale_factor"] = cfg.scale_factor;
  j["filter_sigma"] = cfg.filter_sigma;
  j["snr_db"] = cfg.snr_db;  // +inf serializes as null (noise disabled)
  j["seed"] = cfg.seed;
  j["material_names"] = cfg.material_names;
  j["label_map_path"] = cfg.label_map_path;
  return j;
}

SceneConfig parse_scene_config(const json& j, const std::string& where) {
  static const std::vector<std::string> known = {
      "scale_factor", "filter_sigma", "snr_db", "seed", "material_names", "label_map_path"};
  if (!j.is_object()) throw ConfigError(where + ": config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
  auto need = [&](const char* key) -> const json& {
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError(where + ": missing key '" + std::string(key) + "'");
    return *it;
  };

  SceneConfig cfg;
  const json& sf = need("scale_factor");
  if (!sf.is_number_integer() || sf.get<int>() < 1) {
    throw ConfigError(where + ": 'scale_factor' must be a positive integer");
  }
  cfg.scale_factor = sf.get<int>();

  const json& sig = need("filter_sigma");
  if (!sig.is_number() || !(sig.get<double>() > 0.0)) {
    throw ConfigError(where + ": 'filter_sigma' must be a positive number");
  }
  cfg.filter_sigma = sig.get<double>();

  const json& snr = need("snr_db");
  if (snr.is_null()) {
    cfg.snr_db = kInf;  // noise disabled
  } else if (snr.is_number()) {
    cfg.snr_db = snr.get<double>();
  } else {
    throw ConfigError(where + ": 'snr_db' must be a number or null");
  }

  const json& seed = need("seed");
  if (!seed.is_number_unsigned()) {
    throw ConfigError(where + ": 'seed' must be a nonnegative integer");
  }
  cfg.seed = seed.get<std::uint64_t>();

  const json& mats = need("material_names");
  if (!mats.is_array() || mats.empty()) {
    throw ConfigError(where + ": 'material_names' must be a non-empty array");
  }
  for (const auto& m : mats) {
    if (!m.is_string()) throw ConfigError(where + ": 'material_names' entries must be strings");
    cfg.material_names.push_back(m.get<std::string>());
  }

  const json& lmp = need("label_map_path");
  if (!lmp.is_string() || lmp.get<std::string>().empty()) {
    throw ConfigError(where + ": 'label_map_path' must be a non-empty string");
  }
  cfg.label_map_path = lmp.get<std::string>();
  return cfg;
}

// Relative label map paths resolve against the config file's directory.
fs::path resolve_against(const fs::path& base_file, const std::string& p) {
  fs::path path(p);
  if (path.is_relative()) return base_file.parent_path() / path;
  return path;
}

LabelMap load_config_label_map(const std::string& config_path, const SceneConfig& cfg) {
  try {
    return load_label_map(resolve_against(fs::path(config_path), cfg.label_map_path));
  } catch (const ConfigError& e) {
    throw ConfigError("label_map_path: " + std::string(e.what()));
  }
}

// ---------------------------------------------------------------------------
// Manifest

struct ManifestInfo {
  std::string command;
  std::string config_path;
  std::string output_dir;
  std::vector<std::uint64_t> seeds;
  bool timestamps = false;
};

std::string rfc3339_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const fs::path& out_dir, const ManifestInfo& info) {
  json j;
  j["command"] = info.command;
  j["config_path"] = info.config_path;
  j["output_dir"] = info.output_dir;
  j["seeds"] = info.seeds;
  j["version"] = kVersion;
  // Empty unless --timestamps: default runs stay byte-reproducible.
  j["timestamp"] = info.timestamps ? rfc3339_now() : "";
  write_json(out_dir / "manifest.json", j);
}

// ---------------------------------------------------------------------------
// Shared option structs

struct GraphFlags {
  std::string kind = "knn";  // knn | spatial4 | spatial8
  int knn_p = 5;
  std::string weighting = "binary";  // binary | heat | dot
  std::optional<double> sigma_h;
};

struct SolverFlags {
  std::optional<int> p;
  std::optional<double> lambda;
  std::uint64_t seed = 0;
  int max_iter = 1000;
  double tol = 1e-6;
  bool no_asc = false;
};

Weighting parse_weighting(const std::string& w) {
  if (w == "binary") return Weighting::kBinary;
  if (w == "heat") return Weighting::kHeatKernel;
  if (w == "dot") return Weighting::kDotProduct;
  throw ConfigError("unknown weighting '" + w + "'");
}

WeightGraph build_graph(const GraphFlags& flags, const Matrix& X, int low_rows,
                        int low_cols) {
  if (flags.kind == "knn") {
    return build_knn_graph(X, flags.knn_p, parse_weighting(flags.weighting), flags.sigma_h);
  }
  if (flags.kind == "spatial4" || flags.kind == "spatial8") {
    if (low_rows * low_cols != X.cols()) {
      throw ConfigError("scene dims " + std::to_string(low_rows) + "x" +
                        std::to_string(low_cols) + " do not match pixel count " +
                        std::to_string(X.cols()));
    }
    return build_spatial_graph(low_rows, low_cols, flags.kind == "spatial4" ? 4 : 8);
  }
  throw ConfigError("unknown graph kind '" + flags.kind + "'");
}

// ---------------------------------------------------------------------------
// Scene directory

struct SceneOnDisk {
  Matrix observed;
  Matrix true_endmembers;
  Matrix true_abundances;
  int low_rows = 0;
  int low_cols = 0;
};

void write_scene(const fs::path& dir, const SimulatedScene& scene,
                 const std::string& library_path) {
  ensure_dir(dir);
  save_matrix(dir / "observed.f64m", scene.observed);
  save_matrix(dir / "endmembers.f64m", scene.true_endmembers);
  save_matrix(dir / "abundances.f64m", scene.true_abundances);
  json j;
  j["config"] = scene_config_to_json(scene.config);
  j["noise_stats"] = {{"target_snr_db", scene.noise_stats.target_snr_db},
                      {"realized_snr_db", scene.noise_stats.realized_snr_db},
                      {"clamped_fraction", scene.noise_stats.clamped_fraction}};
  j["library_path"] = library_path;
  j["low_rows"] = scene.low_rows;
  j["low_cols"] = scene.low_cols;
  j["bands"] = scene.observed.rows();
  write_json(dir / "scene.json", j);
}

SceneOnDisk read_scene(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw ConfigError(dir.string() + ": scene directory does not exist");
  }
  SceneOnDisk s;
  s.observed = load_matrix(dir / "observed.f64m");
  s.true_endmembers = load_matrix(dir / "endmembers.f64m");
  s.true_abundances = load_matrix(dir / "abundances.f64m");
  const json meta = read_json(dir / "scene.json");
  s.low_rows = meta.value("low_rows", 0);
  s.low_cols = meta.value("low_cols", 0);
  return s;
}

// ---------------------------------------------------------------------------
// Unmix run

struct UnmixResult {
  Factorization fact;
  std::string method;
};

UnmixResult run_unmix(const SceneOnDisk& scene, const std::string& method,
                      const GraphFlags& gflags, const SolverFlags& sflags,
                      const fs::path& out_dir, bool dump_graph) {
  if (method != "nmf" && method != "gnmf") {
    throw ConfigError("method must be 'nmf' or 'gnmf'");
  }
  const bool gnmf = method == "gnmf";
  if (!gnmf && sflags.lambda) {
    throw ConfigError("--lambda only applies to method=gnmf");
  }

  SolverOptions opts;
  opts.p_endmembers = sflags.p ? *sflags.p
                               : estimate_endmember_count(scene.observed);
  opts.lambda = gnmf ? sflags.lambda.value_or(100.0) : 0.0;
  opts.max_iter = sflags.max_iter;
  opts.rel_tol = sflags.tol;
  opts.seed = sflags.seed;
  opts.asc = !sflags.no_asc;

  std::optional<WeightGraph> graph;
  if (gnmf) {
    graph = build_graph(gflags, scene.observed, scene.low_rows, scene.low_cols);
  }

  Factorization fact = solve(scene.observed, graph ? &*graph : nullptr, opts);

  ensure_dir(out_dir);
  save_matrix(out_dir / "U.f64m", fact.endmembers);
  save_matrix(out_dir / "V.f64m", fact.abundances);

  std::ostringstream trace;
  trace.precision(17);
  trace << "iteration,objective\n";
  for (std::size_t i = 0; i < fact.objective_trace.size(); ++i) {
    trace << (i + 1) << ',' << fact.objective_trace[i] << '\n';
  }
  write_text(out_dir / "trace.csv", trace.str());

  if (graph && dump_graph) {
    std::ostringstream edges;
    write_edge_list(*graph, edges);
    write_text(out_dir / "graph.edges", edges.str());
  }

  json run;
  run["method"] = method;
  run["p_endmembers"] = opts.p_endmembers;
  run["lambda"] = opts.lambda;
  if (gnmf) {
    run["graph"] = gflags.kind;
    run["knn_p"] = gflags.knn_p;
    run["weighting"] = gflags.weighting;
    run["sigma_h"] = gflags.sigma_h ? json(*gflags.sigma_h) : json(nullptr);
  } else {
    run["graph"] = nullptr;
  }
  run["seed"] = opts.seed;
  run["max_iter"] = opts.max_iter;
  run["rel_tol"] = opts.rel_tol;
  run["asc"] = opts.asc;
  run["iterations_run"] = fact.iterations_run;
  run["converged"] = fact.converged;
  run["objective_final"] =
      fact.objective_trace.empty() ? json(nullptr) : json(fact.objective_trace.back());
  run["degenerate_rows"] = fact.degenerate_rows;
  write_json(out_dir / "run.json", run);

  return {std::move(fact), method};
}

// ---------------------------------------------------------------------------
// Evaluation

json report_to_json(const EvalReport& r, const std::string& run_dir) {
  json j;
  j["method_label"] = r.method_label;
  j["run_dir"] = run_dir;
  j["permutation"] = r.permutation;
  j["per_endmember_sad_deg"] = r.per_endmember_sad_deg;
  j["rms_sad_deg"] = r.rms_sad_deg;
  j["rms_aad_deg"] = r.rms_aad_deg;
  j["aad_degenerate_pixels"] = r.aad_degenerate_pixels;
  return j;
}

std::string comparison_table(const std::vector<EvalReport>& reports) {
  std::vector<std::string> labels;
  for (const auto& r : reports) {
    std::string label = r.method_label;
    int copies = 1;
    for (const auto& seen : labels) {
      if (seen == label || seen.rfind(label + "#", 0) == 0) ++copies;
    }
    if (copies > 1) label += "#" + std::to_string(copies);
    labels.push_back(label);
  }
  const std::string row0 = "rms_SAD (deg)";
  std::ostringstream os;
  os << std::string(row0.size(), ' ');
  std::vector<std::size_t> widths;
  for (const auto& l : labels) {
    const std::size_t w = std::max<std::size_t>(l.size() + 2, 8);
    widths.push_back(w);
    os << std::string(w - l.size(), ' ') << l;
  }
  os << '\n' << row0;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const std::string v = format2(reports[i].rms_sad_deg);
    os << std::string(widths[i] - v.size(), ' ') << v;
  }
  os << '\n' << "rms_AAD (deg)";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const std::string v = format2(reports[i].rms_aad_deg);
    os << std::string(widths[i] - v.size(), ' ') << v;
  }
  os << '\n';
  return os.str();
}

std::vector<EvalReport> evaluate_runs(const SceneOnDisk& scene,
                                      const std::vector<std::string>& run_dirs,
                                      const fs::path& out_dir) {
  std::vector<EvalReport> reports;
  for (std::size_t i = 0; i < run_dirs.size(); ++i) {
    const fs::path rd(run_dirs[i]);
    const Matrix U_est = load_matrix(rd / "U.f64m");
    const Matrix V_est = load_matrix(rd / "V.f64m");
    std::string label = rd.filename().string();
    const fs::path run_meta = rd / "run.json";
    if (fs::exists(run_meta)) {
      const json meta = read_json(run_meta);
      label = meta.value("method", label);
    }
    if (U_est.rows() != scene.true_endmembers.rows()) {
      throw ConfigError(rd.string() + ": band count " + std::to_string(U_est.rows()) +
                        " does not match scene " +
                        std::to_string(scene.true_endmembers.rows()));
    }
    if (V_est.rows() != scene.true_abundances.rows()) {
      throw ConfigError(rd.string() + ": pixel count mismatch against scene");
    }
    if (U_est.cols() != scene.true_endmembers.cols()) {
      throw ConfigError(rd.string() + ": endmember count " + std::to_string(U_est.cols()) +
                        " does not match scene " +
                        std::to_string(scene.true_endmembers.cols()));
    }
    EvalReport report = evaluate(scene.true_endmembers, scene.true_abundances,
                                 U_est, V_est, label);
    write_json(out_dir / ("eval_" + std::to_string(i) + ".json"),
               report_to_json(report, run_dirs[i]));
    reports.push_back(std::move(report));
  }
  return reports;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int thread_budget(std::size_t jobs) {
  int threads = 1;
  if (const char* env = std::getenv("UNMIX_THREADS")) {
    try {
      threads = std::max(1, std::stoi(env));
    } catch (...) {
      throw ConfigError("UNMIX_THREADS must be an integer");
    }
  }
  return static_cast<int>(std::min<std::size_t>(threads, jobs));
}

// ---------------------------------------------------------------------------
// Commands

int cmd_simulate(const std::string& config_path, const std::string& library_path,
                 const std::string& out_dir, bool timestamps) {
  const json cfg_json = read_json(config_path);
  SceneConfig cfg = parse_scene_config(cfg_json, config_path);
  const SpectralLibrary lib = load_spectral_library(library_path);
  const LabelMap labels = load_config_label_map(config_path, cfg);

  const SimulatedScene scene = simulate(cfg, lib, labels);
  write_scene(out_dir, scene, library_path);
  write_manifest(out_dir, {"simulate", config_path, out_dir, {cfg.seed}, timestamps});

  std::cout << "scene written to " << out_dir << " (L=" << scene.observed.rows()
            << ", N=" << scene.observed.cols() << ", P="
            << scene.true_endmembers.cols() << ", realized SNR="
            << (std::isinf(scene.noise_stats.realized_snr_db)
                    ? std::string("inf")
                    : format2(scene.noise_stats.realized_snr_db))
            << " dB)\n";
  return 0;
}

int cmd_estimate_p(const std::string& scene_dir, double threshold, bool centered,
                   const std::string& out_dir, bool timestamps) {
  const fs::path dir(scene_dir);
  if (!fs::is_directory(dir)) {
    throw ConfigError(scene_dir + ": scene directory does not exist");
  }
  const Matrix X = load_matrix(dir / "observed.f64m");
  const PcaSpectrum spec = pca_spectrum(X, centered);
  const int p = estimate_endmember_count(X, threshold, centered);

  json j;
  j["estimated_p"] = p;
  j["threshold"] = threshold;
  j["centered"] = centered;
  std::vector<double> head;
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(10, spec.eigenvalues.size()); ++i) {
    head.push_back(spec.eigenvalues(i));
  }
  j["eigenvalues_head"] = head;

  ensure_dir(out_dir);
  write_json(fs::path(out_dir) / "estimate_p.json", j);
  write_manifest(out_dir, {"estimate-p", scene_dir, out_dir, {}, timestamps});
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_unmix(const std::string& scene_dir, const std::string& method,
              const GraphFlags& gflags, const SolverFlags& sflags,
              const std::string& out_dir, bool dump_graph, bool timestamps) {
  const SceneOnDisk scene = read_scene(scene_dir);
  const UnmixResult result = run_unmix(scene, method, gflags, sflags, out_dir, dump_graph);
  write_manifest(out_dir, {"unmix", scene_dir, out_dir, {sflags.seed}, timestamps});
  std::cout << method << ": " << result.fact.iterations_run << " iterations, "
            << (result.fact.converged ? "converged" : "max_iter reached");
  if (!result.fact.objective_trace.empty()) {
    std::ostringstream obj;
    obj.precision(6);
    obj << result.fact.objective_trace.back();
    std::cout << ", objective " << obj.str();
  }
  std::cout << "\n";
  return 0;
}

int cmd_evaluate(const std::string& scene_dir, const std::vector<std::string>& run_dirs,
                 const std::string& out_dir, bool timestamps) {
  const SceneOnDisk scene = read_scene(scene_dir);
  ensure_dir(out_dir);
  const std::vector<EvalReport> reports = evaluate_runs(scene, run_dirs, out_dir);
  const std::string table = comparison_table(reports);
  write_text(fs::path(out_dir) / "table.txt", table);
  write_manifest(out_dir, {"evaluate", scene_dir, out_dir, {}, timestamps});
  std::cout << table;
  return 0;
}

int cmd_pipeline(const std::string& config_path, const std::string& library_path,
                 const std::vector<std::uint64_t>& seeds, const GraphFlags& gflags,
                 const SolverFlags& sflags, const std::string& out_dir,
                 bool timestamps) {
  if (seeds.empty()) throw ConfigError("pipeline: seed list is empty");

  const json cfg_json = read_json(config_path);
  const SceneConfig base_cfg = parse_scene_config(cfg_json, config_path);
  const SpectralLibrary lib = load_spectral_library(library_path);
  const LabelMap labels = load_config_label_map(config_path, base_cfg);
  ensure_dir(out_dir);

  struct SeedOutcome {
    bool ok = false;
    std::string error;
    double nmf_sad = 0, nmf_aad = 0, gnmf_sad = 0, gnmf_aad = 0;
  };
  std::vector<SeedOutcome> outcomes(seeds.size());

  auto run_seed = [&](std::size_t idx) {
    SeedOutcome& out = outcomes[idx];
    const std::uint64_t seed = seeds[idx];
    try {
      const fs::path seed_dir = fs::path(out_dir) / ("seed_" + std::to_string(seed));
      SceneConfig cfg = base_cfg;
      cfg.seed = seed;

      const SimulatedScene sim = simulate(cfg, lib, labels);
      write_scene(seed_dir / "scene", sim, library_path);
      write_manifest(seed_dir / "scene", {"simulate", config_path,
                                          (seed_dir / "scene").string(), {seed}, timestamps});

      SceneOnDisk scene;
      scene.observed = sim.observed;
      scene.true_endmembers = sim.true_endmembers;
      scene.true_abundances = sim.true_abundances;
      scene.low_rows = sim.low_rows;
      scene.low_cols = sim.low_cols;

      SolverFlags per_seed = sflags;
      per_seed.seed = seed;
      if (!per_seed.p) per_seed.p = static_cast<int>(cfg.material_names.size());

      run_unmix(scene, "nmf", gflags, [&] {
        SolverFlags f = per_seed;
        f.lambda.reset();  // lambda applies to the gnmf leg only
        return f;
      }(), seed_dir / "nmf", false);
      write_manifest(seed_dir / "nmf", {"unmix", (seed_dir / "scene").string(),
                                        (seed_dir / "nmf").string(), {seed}, timestamps});

      run_unmix(scene, "gnmf", gflags, per_seed, seed_dir / "gnmf", false);
      write_manifest(seed_dir / "gnmf", {"unmix", (seed_dir / "scene").string(),
                                         (seed_dir / "gnmf").string(), {seed}, timestamps});

      const fs::path eval_dir = seed_dir / "eval";
      ensure_dir(eval_dir);
      const std::vector<EvalReport> reports = evaluate_runs(
          scene, {(seed_dir / "nmf").string(), (seed_dir / "gnmf").string()}, eval_dir);
      write_text(eval_dir / "table.txt", comparison_table(reports));
      write_manifest(eval_dir, {"evaluate", (seed_dir / "scene").string(),
                                eval_dir.string(), {}, timestamps});

      out.nmf_sad = reports[0].rms_sad_deg;
      out.nmf_aad = reports[0].rms_aad_deg;
      out.gnmf_sad = reports[1].rms_sad_deg;
      out.gnmf_aad = reports[1].rms_aad_deg;
      out.ok = true;
    } catch (const std::exception& e) {
      out.error = e.what();
    }
  };

  const int threads = thread_budget(seeds.size());
  if (threads <= 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i) run_seed(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < seeds.size(); i = next.fetch_add(1)) {
          run_seed(i);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  json aggregate;
  aggregate["seeds"] = seeds;
  json runs = json::array();
  std::vector<double> nmf_sads, nmf_aads, gnmf_sads, gnmf_aads;
  std::vector<std::uint64_t> failed;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const SeedOutcome& o = outcomes[i];
    json entry;
    entry["seed"] = seeds[i];
    entry["ok"] = o.ok;
    if (o.ok) {
      entry["nmf"] = {{"rms_sad_deg", o.nmf_sad}, {"rms_aad_deg", o.nmf_aad}};
      entry["gnmf"] = {{"rms_sad_deg", o.gnmf_sad}, {"rms_aad_deg", o.gnmf_aad}};
      nmf_sads.push_back(o.nmf_sad);
      nmf_aads.push_back(o.nmf_aad);
      gnmf_sads.push_back(o.gnmf_sad);
      gnmf_aads.push_back(o.gnmf_aad);
      std::cout << "seed " << seeds[i] << ": nmf rms_SAD=" << format2(o.nmf_sad)
                << " rms_AAD=" << format2(o.nmf_aad)
                << " | gnmf rms_SAD=" << format2(o.gnmf_sad)
                << " rms_AAD=" << format2(o.gnmf_aad) << "\n";
    } else {
      entry["error"] = o.error;
      failed.push_back(seeds[i]);
      std::cout << "seed " << seeds[i] << ": FAILED (" << o.error << ")\n";
    }
    runs.push_back(entry);
  }
  aggregate["runs"] = runs;
  aggregate["failed_seeds"] = failed;
  if (!nmf_sads.empty()) {
    aggregate["median"] = {
        {"nmf", {{"rms_sad_deg", median(nmf_sads)}, {"rms_aad_deg", median(nmf_aads)}}},
        {"gnmf", {{"rms_sad_deg", median(gnmf_sads)}, {"rms_aad_deg", median(gnmf_aads)}}}};
    std::cout << "median: nmf rms_SAD=" << format2(median(nmf_sads))
              << " rms_AAD=" << format2(median(nmf_aads))
              << " | gnmf rms_SAD=" << format2(median(gnmf_sads))
              << " rms_AAD=" << format2(median(gnmf_aads)) << "\n";
  } else {
    aggregate["median"] = nullptr;
  }
  write_json(fs::path(out_dir) / "aggregate.json", aggregate);
  write_manifest(out_dir, {"pipeline", config_path, out_dir, seeds, timestamps});
  return failed.empty() ? 0 : 1;
}

void add_graph_flags(CLI::App* cmd, GraphFlags& flags) {
  cmd->add_option("--graph", flags.kind, "graph construction: knn, spatial4 or spatial8")
      ->check(CLI::IsMember({"knn", "spatial4", "spatial8"}))
      ->capture_default_str();
  cmd->add_option("--knn-p", flags.knn_p, "neighbours per pixel for knn graphs")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--weighting", flags.weighting, "edge weighting: binary, heat or dot")
      ->check(CLI::IsMember({"binary", "heat", "dot"}))
      ->capture_default_str();
  cmd->add_option("--sigma-h", flags.sigma_h,
                  "heat kernel width (default: mean squared edge length)");
}

void add_solver_flags(CLI::App* cmd, SolverFlags& flags, bool with_seed) {
  cmd->add_option("--p", flags.p, "endmember count (default: PCA estimate)");
  cmd->add_option("--lambda", flags.lambda, "graph regularization weight (gnmf only, default 100)");
  if (with_seed) {
    cmd->add_option("--seed", flags.seed, "solver init seed")->capture_default_str();
  }
  cmd->add_option("--max-iter", flags.max_iter, "iteration cap")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--tol", flags.tol, "relative objective-change stop threshold")
      ->capture_default_str();
  cmd->add_flag("--no-asc", flags.no_asc, "skip per-iteration abundance row normalization");
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"hsunmix: NMF/GNMF hyperspectral unmixing on simulated scenes"};
  app.require_subcommand(1);
  app.fallthrough();
  bool timestamps = false;
  app.add_flag("--timestamps", timestamps,
               "record wall-clock time in manifests (off by default, keeps runs byte-reproducible)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate a scene with known ground truth");
  std::string sim_config, sim_library, sim_out;
  sim->add_option("--config", sim_config, "scene config JSON")->required()->check(CLI::ExistingFile);
  sim->add_option("--library", sim_library, "spectral library CSV")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", sim_out, "output directory")->required();

  // estimate-p
  auto* est = app.add_subcommand("estimate-p", "estimate the endmember count via PCA");
  std::string est_scene, est_out;
  double est_threshold = 0.995;
  bool est_centered = true;
  est->add_option("--scene", est_scene, "scene directory")->required();
  est->add_option("--threshold", est_threshold, "cumulative explained-variance threshold")
      ->check(CLI::Range(1e-12, 1.0))
      ->capture_default_str();
  est->add_flag("--centered,!--uncentered", est_centered, "center spectra before PCA")
      ->capture_default_str();
  est->add_option("--out", est_out, "output directory")->required();

  // unmix
  auto* unm = app.add_subcommand("unmix", "factor a scene with nmf or gnmf");
  std::string unm_scene, unm_method, unm_out;
  GraphFlags unm_graph;
  SolverFlags unm_solver;
  bool unm_dump_graph = false;
  unm->add_option("--scene", unm_scene, "scene directory")->required();
  unm->add_option("--method", unm_method, "nmf or gnmf")
      ->required()
      ->check(CLI::IsMember({"nmf", "gnmf"}));
  add_graph_flags(unm, unm_graph);
  add_solver_flags(unm, unm_solver, true);
  unm->add_flag("--dump-graph", unm_dump_graph, "also write the graph edge list");
  unm->add_option("--out", unm_out, "output directory")->required();

  // evaluate
  auto* eva = app.add_subcommand("evaluate", "score runs against scene ground truth");
  std::string eva_scene, eva_out;
  std::vector<std::string> eva_runs;
  eva->add_option("--scene", eva_scene, "scene directory")->required();
  eva->add_option("--out", eva_out, "output directory")->required();
  eva->add_option("runs", eva_runs, "one or more unmix run directories")->required();

  // pipeline
  auto* pip = app.add_subcommand("pipeline",
                                 "simulate + unmix (nmf and gnmf) + evaluate over a seed sweep");
  std::string pip_config, pip_library, pip_out;
  std::vector<std::uint64_t> pip_seeds;
  GraphFlags pip_graph;
  SolverFlags pip_solver;
  pip->add_option("--config", pip_config, "scene config JSON")->required()->check(CLI::ExistingFile);
  pip->add_option("--library", pip_library, "spectral library CSV")->required()->check(CLI::ExistingFile);
  pip->add_option("--seeds", pip_seeds, "seed sweep (scene and solver seeds)")->required();
  add_graph_flags(pip, pip_graph);
  add_solver_flags(pip, pip_solver, false);
  pip->add_option("--out", pip_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*sim) return cmd_simulate(sim_config, sim_library, sim_out, timestamps);
    if (*est) return cmd_estimate_p(est_scene, est_threshold, est_centered, est_out, timestamps);
    if (*unm) {
      return cmd_unmix(unm_scene, unm_method, unm_graph, unm_solver, unm_out,
                       unm_dump_graph, timestamps);
    }
    if (*eva) return cmd_evaluate(eva_scene, eva_runs, eva_out, timestamps);
    if (*pip) {
      return cmd_pipeline(pip_config, pip_library, pip_seeds, pip_graph, pip_solver,
                          pip_out, timestamps);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace hsunmix
