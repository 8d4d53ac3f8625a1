// Release gate: one test case per shipping criterion, each printing a
// [PASS]/[FAIL] line so the run log doubles as the checklist.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <vector>

#include "helpers.hpp"
#include "hsunmix/cli.hpp"
#include "hsunmix/graph.hpp"
#include "hsunmix/io.hpp"
#include "hsunmix/metrics.hpp"
#include "hsunmix/scene.hpp"
#include "hsunmix/solver.hpp"
#include "hsunmix/subspace.hpp"

using namespace hsunmix;
using testutil::TempDir;

namespace {

constexpr double kPi = 3.14159265358979323846;

void report(int criterion, bool passed, const char* summary) {
  std::printf("[%s] %2d. %s\n", passed ? "PASS" : "FAIL", criterion, summary);
  std::fflush(stdout);
}

SpectralLibrary bundled_library() {
  return load_spectral_library(testutil::data_file("spectral_library.csv"));
}

LabelMap bundled_label_map() {
  return load_label_map(testutil::data_file("label_map.csv"));
}

const std::vector<std::string> kBundledMaterials = {"vegetation", "dry_soil",
                                                    "calcite", "basalt"};

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<std::string> storage{"hsunmix"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : storage) argv.push_back(s.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

std::vector<char> read_bytes(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

bool dirs_byte_identical(const std::filesystem::path& a, const std::filesystem::path& b) {
  std::vector<std::filesystem::path> rel;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(a)) {
    if (entry.is_regular_file()) rel.push_back(std::filesystem::relative(entry.path(), a));
  }
  std::size_t b_files = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(b)) {
    if (entry.is_regular_file()) ++b_files;
  }
  if (b_files != rel.size()) return false;
  for (const auto& r : rel) {
    if (!std::filesystem::exists(b / r)) return false;
    if (read_bytes(a / r) != read_bytes(b / r)) return false;
  }
  return true;
}

// Noiseless sum-to-one mixture with P disjoint-support vertices; per-pixel
// pull toward the centroid keeps the data strictly mixed.
Matrix simplex_scene(int bands, int pixels, int p, std::mt19937_64& gen) {
  Matrix U = Matrix::Zero(bands, p);
  const int span = bands / p;
  for (int j = 0; j < p; ++j) {
    const double mag = 0.5 + testutil::u01(gen);
    for (int r = j * span; r < (j + 1) * span; ++r) U(r, j) = mag / std::sqrt(span);
  }
  Matrix V(pixels, p);
  for (int n = 0; n < pixels; ++n) {
    const double delta = 0.4 * testutil::u01(gen);
    V.row(n).setConstant(delta / p);
    V(n, n % p) += 1.0 - delta;
  }
  return U * V.transpose();
}

LabelMap random_label_map(int rows, int cols, int classes, std::mt19937_64& gen) {
  LabelMap lm;
  lm.rows = rows;
  lm.cols = cols;
  lm.class_count = classes;
  lm.labels.resize(static_cast<std::size_t>(rows) * cols);
  for (auto& v : lm.labels) {
    v = static_cast<int>(testutil::u01(gen) * classes);
    if (v == classes) v = classes - 1;
  }
  for (int c = 0; c < classes; ++c) lm.labels[static_cast<std::size_t>(c)] = c;
  return lm;
}

}  // namespace

TEST_CASE("criterion 1: gnmf beats nmf on the bundled scene (seed medians)") {
  const SpectralLibrary lib = bundled_library();
  const LabelMap labels = bundled_label_map();

  // fixture preconditions for this comparison
  bool preconditions = labels.rows >= 60 && labels.cols >= 60 && labels.class_count == 4;
  for (std::size_t i = 0; i < kBundledMaterials.size() && preconditions; ++i) {
    for (std::size_t j = i + 1; j < kBundledMaterials.size(); ++j) {
      const double deg = sad(lib.signature(kBundledMaterials[i]),
                             lib.signature(kBundledMaterials[j])) * 180.0 / kPi;
      if (deg < 10.0) {
        preconditions = false;
        break;
      }
    }
  }

  SceneConfig cfg;
  cfg.scale_factor = 3;
  cfg.filter_sigma = 0.5;
  cfg.snr_db = 30.0;
  cfg.material_names = kBundledMaterials;

  std::vector<double> nmf_sad, nmf_aad, gnmf_sad, gnmf_aad;
  for (std::uint64_t seed = 1; seed <= 11; ++seed) {
    cfg.seed = seed;
    const SimulatedScene scene = simulate(cfg, lib, labels);

    SolverOptions opts;
    opts.p_endmembers = 4;
    opts.max_iter = 1000;
    opts.rel_tol = 1e-9;
    opts.seed = seed;

    const Factorization nmf = solve(scene.observed, nullptr, opts);
    const EvalReport nmf_report = evaluate(scene.true_endmembers, scene.true_abundances,
                                           nmf.endmembers, nmf.abundances, "nmf");

    const WeightGraph graph = build_knn_graph(scene.observed, 5, Weighting::kBinary);
    SolverOptions gopts = opts;
    gopts.lambda = 100.0;
    const Factorization gnmf = solve(scene.observed, &graph, gopts);
    const EvalReport gnmf_report = evaluate(scene.true_endmembers, scene.true_abundances,
                                            gnmf.endmembers, gnmf.abundances, "gnmf");

    nmf_sad.push_back(nmf_report.rms_sad_deg);
    nmf_aad.push_back(nmf_report.rms_aad_deg);
    gnmf_sad.push_back(gnmf_report.rms_sad_deg);
    gnmf_aad.push_back(gnmf_report.rms_aad_deg);
  }

  const double med_nmf_sad = median_of(nmf_sad);
  const double med_nmf_aad = median_of(nmf_aad);
  const double med_gnmf_sad = median_of(gnmf_sad);
  const double med_gnmf_aad = median_of(gnmf_aad);
  const bool passed = preconditions && med_gnmf_sad < med_nmf_sad &&
                      med_gnmf_aad < med_nmf_aad;
  std::printf("      medians over 11 seeds: rms_SAD %.2f vs %.2f deg, "
              "rms_AAD %.2f vs %.2f deg (gnmf vs nmf)\n",
              med_gnmf_sad, med_nmf_sad, med_gnmf_aad, med_nmf_aad);
  report(1, passed, "median rms_SAD and rms_AAD: gnmf < nmf on the bundled scene");
  CHECK(passed);
}

TEST_CASE("criterion 2: objective monotone without asc for lambda 0/1/100") {
  std::mt19937_64 gen(1002);
  bool passed = true;
  for (int instance = 0; instance < 20 && passed; ++instance) {
    const Matrix X = testutil::random_matrix(50, 200, gen, 0.01, 1.0);
    const WeightGraph graph = build_knn_graph(X, 3, Weighting::kBinary);
    for (const double lambda : {0.0, 1.0, 100.0}) {
      SolverOptions opts;
      opts.p_endmembers = 4;
      opts.lambda = lambda;
      opts.max_iter = 500;
      opts.rel_tol = 1e-16;  // never stop early
      opts.asc = false;
      opts.seed = 900 + static_cast<std::uint64_t>(instance);

      const GraphLaplacian lap = laplacian(graph);
      const auto [U0, V0] = init_factors(50, 200, 4, opts.seed);
      const double initial = lambda > 0.0 ? objective_gnmf(X, U0, V0, lap, lambda)
                                          : objective_nmf(X, U0, V0);

      const Factorization fact =
          solve(X, lambda > 0.0 ? &graph : nullptr, opts);
      if (fact.iterations_run != 500) passed = false;
      double prev = initial;
      for (const double obj : fact.objective_trace) {
        if (obj > prev + 1e-10) {
          passed = false;
          break;
        }
        prev = obj;
      }
      if (!passed) break;
    }
  }
  report(2, passed, "20 instances x lambda {0,1,100}: objective never rises (500 iters)");
  CHECK(passed);
}

TEST_CASE("criterion 3: trace form equals half pairwise sum") {
  std::mt19937_64 gen(1003);
  bool passed = true;
  for (int instance = 0; instance < 50 && passed; ++instance) {
    const int n = 10 + static_cast<int>(testutil::u01(gen) * 90);
    const Matrix X = testutil::random_matrix(6, n, gen);
    const int p = 1 + instance % 5;
    const WeightGraph g =
        instance % 3 == 0
            ? build_knn_graph(X, std::min(p, n - 1), Weighting::kHeatKernel)
            : build_knn_graph(X, std::min(p, n - 1), Weighting::kBinary);
    const GraphLaplacian lap = laplacian(g);
    const Matrix V = testutil::random_matrix(n, 3, gen, -1.0, 1.0);

    double pairwise = 0.0;
    for (int k = 0; k < g.weights.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(g.weights, k); it; ++it) {
        pairwise += it.value() * (V.row(it.row()) - V.row(it.col())).squaredNorm();
      }
    }
    pairwise *= 0.5;

    const double trace_form = regularizer_value(V, lap);
    const double scale = std::max(1.0, std::abs(pairwise));
    if (std::abs(trace_form - pairwise) / scale > 1e-10) passed = false;
  }
  report(3, passed, "50 random graphs: Tr(V'LV) == half weighted pairwise sum (1e-10)");
  CHECK(passed);
}

TEST_CASE("criterion 4: laplacians have zero row sums and are psd") {
  std::mt19937_64 gen(1004);
  std::vector<WeightGraph> graphs;
  graphs.push_back(build_spatial_graph(7, 9, 4));
  graphs.push_back(build_spatial_graph(6, 6, 8));
  for (int rep = 0; rep < 4; ++rep) {
    const Matrix X = testutil::random_matrix(5, 40 + 10 * rep, gen, 0.05, 1.0);
    graphs.push_back(build_knn_graph(X, 3, Weighting::kBinary));
    graphs.push_back(build_knn_graph(X, 4, Weighting::kHeatKernel));
    graphs.push_back(build_knn_graph(X, 2, Weighting::kDotProduct));
  }

  bool passed = true;
  for (const WeightGraph& g : graphs) {
    const GraphLaplacian lap = laplacian(g);
    const Matrix dense = Matrix(lap.matrix);
    if (dense.rowwise().sum().cwiseAbs().maxCoeff() > 1e-12) passed = false;
    for (int rep = 0; rep < 100; ++rep) {
      const Vector v = testutil::random_vector(g.n, gen, -1.0, 1.0);
      if (v.dot(dense * v) < -1e-10) passed = false;
    }
    if (!passed) break;
  }
  report(4, passed, "all constructed laplacians: zero row sums, v'Lv >= -1e-10");
  CHECK(passed);
}

TEST_CASE("criterion 5: asc keeps abundance rows on the simplex each iteration") {
  std::mt19937_64 gen(1005);
  const Matrix X = testutil::random_matrix(20, 60, gen, 0.05, 1.0);
  const WeightGraph g = build_knn_graph(X, 4, Weighting::kBinary);
  SolverOptions opts;
  opts.p_endmembers = 3;
  opts.lambda = 10.0;
  opts.max_iter = 80;
  opts.rel_tol = 1e-15;
  opts.seed = 44;

  bool passed = true;
  const Factorization fact =
      solve(X, &g, opts, [&](int, const Matrix&, const Matrix& V) {
        for (Eigen::Index r = 0; r < V.rows(); ++r) {
          if (std::abs(V.row(r).sum() - 1.0) > 1e-9) passed = false;
        }
      });
  if (fact.abundances.minCoeff() < 0.0) passed = false;
  report(5, passed, "asc=true: every iteration's V rows sum to 1 +- 1e-9, final V >= 0");
  CHECK(passed);
}

TEST_CASE("criterion 6: metric oracles") {
  bool passed = true;
  auto near = [&](double got, double want, double tol) {
    if (std::abs(got - want) > tol) passed = false;
  };

  Vector e1(2), e2(2), diag(2), half(2), zero(2);
  e1 << 1.0, 0.0;
  e2 << 0.0, 1.0;
  diag << 1.0, 1.0;
  half << 0.5, 0.5;
  zero << 0.0, 0.0;

  Vector spectrum(3);
  spectrum << 0.2, 0.7, 0.1;
  near(sad(spectrum, spectrum), 0.0, 1e-12);
  near(sad(e1, e2), kPi / 2, 1e-12);
  near(sad(diag, e1), kPi / 4, 1e-12);
  near(aad(half, half), 0.0, 1e-12);
  near(aad(e1, e2), kPi / 2, 1e-12);
  near(aad(half, e1), kPi / 4, 1e-12);
  bool degenerate = false;
  near(aad(zero, zero, &degenerate), 0.0, 1e-12);
  if (degenerate) passed = false;
  near(aad(zero, e1, &degenerate), kPi / 2, 1e-12);
  if (!degenerate) passed = false;

  // rms closed forms, angles {0, pi/2} -> pi/(2 sqrt 2) rad in degrees
  Matrix truth = Matrix::Zero(4, 2), est = Matrix::Zero(4, 2);
  truth(0, 0) = 1.0;
  truth(1, 1) = 1.0;
  est(0, 0) = 1.0;
  est(2, 1) = 1.0;
  near(rms_sad_degrees(truth, est, {0, 1}), 63.63961030678928, 1e-10);

  std::mt19937_64 gen(1006);
  for (int rep = 0; rep < 100 && passed; ++rep) {
    const int p = 2 + rep % 4;  // P in {2..5}
    const Matrix A = testutil::random_matrix(8, p, gen, 0.05, 1.0);
    const Matrix B = testutil::random_matrix(8, p, gen, 0.05, 1.0);
    const std::vector<int> got = match_endmembers(A, B);

    auto cost = [&](const std::vector<int>& perm) {
      double total = 0.0;
      for (std::size_t j = 0; j < perm.size(); ++j) {
        total += sad(A.col(perm[j]), B.col(static_cast<int>(j)));
      }
      return total;
    };
    std::vector<int> perm(p);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
      best = std::min(best, cost(perm));
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (std::abs(cost(got) - best) > 1e-10) passed = false;
  }
  report(6, passed, "trivial sad/aad/rms values exact; matching == exhaustive, 100 runs");
  CHECK(passed);
}

TEST_CASE("criterion 7: noiseless scenes satisfy the mixing model") {
  const SpectralLibrary lib = bundled_library();
  std::mt19937_64 gen(1007);
  bool passed = true;
  for (int rep = 0; rep < 10 && passed; ++rep) {
    const int rows = 9 + 3 * (rep % 3);
    const int cols = 9 + 3 * (rep % 4);
    const int classes = 2 + rep % 3;
    const LabelMap lm = random_label_map(rows, cols, classes, gen);

    SceneConfig cfg;
    cfg.scale_factor = 3;
    cfg.filter_sigma = 0.5;
    cfg.snr_db = std::numeric_limits<double>::infinity();
    cfg.material_names.assign(kBundledMaterials.begin(),
                              kBundledMaterials.begin() + classes);
    const SimulatedScene scene = simulate(cfg, lib, lm);
    const double rel =
        (scene.observed - scene.true_endmembers * scene.true_abundances.transpose())
            .norm() /
        scene.observed.norm();
    if (!(rel <= 1e-9)) passed = false;
  }
  report(7, passed, "10 random noiseless scenes: ||X - U V'||/||X|| <= 1e-9");
  CHECK(passed);
}

TEST_CASE("criterion 8: noise calibration within 0.2 dB, clamping under 1%") {
  const SpectralLibrary lib = bundled_library();
  const LabelMap labels = bundled_label_map();
  SceneConfig cfg;
  cfg.scale_factor = 3;
  cfg.filter_sigma = 0.5;
  cfg.snr_db = 30.0;
  cfg.material_names = kBundledMaterials;

  bool passed = true;
  for (const std::uint64_t seed : {1ull, 2ull, 3ull}) {
    cfg.seed = seed;
    const SimulatedScene scene = simulate(cfg, lib, labels);  // 224 x 441 samples
    if (std::abs(scene.noise_stats.realized_snr_db - 30.0) > 0.2) passed = false;
    if (scene.noise_stats.clamped_fraction >= 0.01) passed = false;
  }
  const auto [noisy, stats] = add_noise_snr(Matrix::Constant(100, 1000, 1.0), 30.0, 5);
  if (std::abs(stats.realized_snr_db - 30.0) > 0.2) passed = false;
  if (stats.clamped_fraction >= 0.01) passed = false;
  report(8, passed, "realized SNR = 30 +- 0.2 dB, clamped share < 1% (>= 1e4 samples)");
  CHECK(passed);
}

TEST_CASE("criterion 9: rank-1 scenes recovered to 1e-3 residual") {
  std::mt19937_64 gen(1009);
  bool passed = true;
  for (int rep = 0; rep < 10 && passed; ++rep) {
    const Vector u = testutil::random_vector(25, gen, 0.05, 1.0);
    const Vector v = testutil::random_vector(40, gen, 0.05, 1.0);
    const Matrix X = u * v.transpose();
    SolverOptions opts;
    opts.p_endmembers = 1;
    opts.max_iter = 2000;
    opts.rel_tol = 1e-14;
    opts.asc = false;
    opts.seed = 3000 + static_cast<std::uint64_t>(rep);
    const Factorization fact = solve(X, nullptr, opts);
    const double rel =
        (X - fact.endmembers * fact.abundances.transpose()).norm() / X.norm();
    if (!(rel <= 1e-3)) passed = false;
  }
  report(9, passed, "10 random rank-1 instances: relative residual <= 1e-3");
  CHECK(passed);
}

TEST_CASE("criterion 10: endmember count recovered for P in 2..5") {
  std::mt19937_64 gen(1010);
  bool passed = true;
  for (int p = 2; p <= 5 && passed; ++p) {
    for (int rep = 0; rep < 10; ++rep) {
      const Matrix X = simplex_scene(40, 150 + 10 * rep, p, gen);
      if (estimate_endmember_count(X, 0.995, true) != p) {
        passed = false;
        break;
      }
    }
  }
  report(10, passed, "noiseless mixtures, P in {2..5}, 10 each: centered estimate == P");
  CHECK(passed);
}

TEST_CASE("criterion 11: cli artifacts are byte-identical across reruns") {
  TempDir tmp;
  // small noisy scene: 12x12 labels, two materials, snr 25
  std::string rows;
  for (int r = 0; r < 12; ++r) {
    for (int c = 0; c < 12; ++c) {
      rows += ((r / 3 + c / 3) % 2 == 0 ? "0" : "1");
      rows += (c == 11 ? "\n" : ",");
    }
  }
  {
    std::ofstream os(tmp.path() / "labels.csv", std::ios::binary);
    os << rows;
  }
  {
    std::ofstream os(tmp.path() / "config.json", std::ios::binary);
    os << R"({"scale_factor":3,"filter_sigma":0.5,"snr_db":25.0,"seed":6,)"
       << R"("material_names":["vegetation","dry_soil"],"label_map_path":"labels.csv"})";
  }
  const std::string cfg = tmp.str("config.json");
  const std::string lib = testutil::data_file("spectral_library.csv");

  // Manifests record the paths given on the command line, so the rerun must
  // target the same directory: snapshot the first run, wipe it, run again.
  const std::string base = tmp.str("run");
  const auto run_all = [&]() {
    bool ok = run_cli({"simulate", "--config", cfg, "--library", lib,
                       "--out", base + "/scene"}) == 0;
    ok = ok && run_cli({"estimate-p", "--scene", base + "/scene",
                        "--out", base + "/est"}) == 0;
    ok = ok && run_cli({"unmix", "--scene", base + "/scene", "--method", "gnmf",
                        "--p", "2", "--seed", "6", "--max-iter", "50",
                        "--out", base + "/gnmf"}) == 0;
    ok = ok && run_cli({"evaluate", "--scene", base + "/scene",
                        "--out", base + "/eval", base + "/gnmf"}) == 0;
    return ok;
  };

  bool passed = run_all();
  if (passed) {
    std::filesystem::copy(tmp.path() / "run", tmp.path() / "snapshot",
                          std::filesystem::copy_options::recursive);
    std::filesystem::remove_all(tmp.path() / "run");
    passed = run_all();
  }
  if (passed) passed = dirs_byte_identical(tmp.path() / "snapshot", tmp.path() / "run");
  report(11, passed, "simulate/estimate-p/unmix/evaluate rerun: byte-identical output");
  CHECK(passed);
}
