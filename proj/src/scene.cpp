#include "hsunmix/scene.hpp"

#include <cmath>
#include <limits>

#include "hsunmix/errors.hpp"
#include "hsunmix/rng.hpp"

namespace hsunmix {

namespace {

// Mirror without repeating the edge sample: -1 -> 1, n -> n-2.
int reflect_index(int idx, int n) {
  if (n == 1) return 0;
  while (idx < 0 || idx >= n) {
    if (idx < 0) idx = -idx;
    if (idx >= n) idx = 2 * n - 2 - idx;
  }
  return idx;
}

}  // namespace

Matrix gaussian_kernel(int k, double sigma) {
  if (k < 1 || k % 2 == 0) {
    throw ConfigError("gaussian_kernel: size must be a positive odd integer, got " +
                      std::to_string(k));
  }
  if (!(sigma > 0.0)) {
    throw ConfigError("gaussian_kernel: sigma must be positive");
  }
  const int h = (k - 1) / 2;
  Matrix kern(k, k);
  for (int dr = -h; dr <= h; ++dr) {
    for (int dc = -h; dc <= h; ++dc) {
      kern(dr + h, dc + h) = std::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma));
    }
  }
  kern /= kern.sum();
  return kern;
}

HyperCube filter_cube(const HyperCube& cube, const Matrix& kernel) {
  const int k = static_cast<int>(kernel.rows());
  if (kernel.cols() != k || k % 2 == 0) {
    throw ConfigError("filter_cube: kernel must be square with odd size");
  }
  if (k > cube.rows || k > cube.cols) {
    throw ConfigError("filter_cube: kernel size " + std::to_string(k) +
                      " exceeds image " + std::to_string(cube.rows) + "x" +
                      std::to_string(cube.cols));
  }
  const int h = (k - 1) / 2;
  HyperCube out(cube.rows, cube.cols, cube.bands);
  for (int r = 0; r < cube.rows; ++r) {
    for (int c = 0; c < cube.cols; ++c) {
      for (int dr = -h; dr <= h; ++dr) {
        const int rr = reflect_index(r + dr, cube.rows);
        for (int dc = -h; dc <= h; ++dc) {
          const int cc = reflect_index(c + dc, cube.cols);
          const double w = kernel(dr + h, dc + h);
          const double* src = &cube.values[(static_cast<std::size_t>(rr) * cube.cols + cc) * cube.bands];
          double* dst = &out.values[(static_cast<std::size_t>(r) * cube.cols + c) * cube.bands];
          for (int b = 0; b < cube.bands; ++b) dst[b] += w * src[b];
        }
      }
    }
  }
  return out;
}

HyperCube downsample(const HyperCube& cube, int k) {
  if (k < 1) throw ConfigError("downsample: factor must be >= 1");
  const int out_rows = cube.rows / k;
  const int out_cols = cube.cols / k;
  if (out_rows < 1 || out_cols < 1) {
    throw ConfigError("downsample: factor " + std::to_string(k) +
                      " leaves an empty image");
  }
  HyperCube out(out_rows, out_cols, cube.bands);
  const double inv = 1.0 / (static_cast<double>(k) * k);
  for (int r = 0; r < out_rows; ++r) {
    for (int c = 0; c < out_cols; ++c) {
      double* dst = &out.values[(static_cast<std::size_t>(r) * out_cols + c) * cube.bands];
      for (int dr = 0; dr < k; ++dr) {
        for (int dc = 0; dc < k; ++dc) {
          const double* src =
              &cube.values[(static_cast<std::size_t>(r * k + dr) * cube.cols + (c * k + dc)) * cube.bands];
          for (int b = 0; b < cube.bands; ++b) dst[b] += src[b];
        }
      }
      for (int b = 0; b < cube.bands; ++b) dst[b] *= inv;
    }
  }
  return out;
}

HyperCube assign_signatures(const LabelMap& labels, const SpectralLibrary& lib,
                            const std::vector<std::string>& names) {
  if (static_cast<int>(names.size()) != labels.class_count) {
    throw ConfigError("assign_signatures: label map has " +
                      std::to_string(labels.class_count) + " classes but " +
                      std::to_string(names.size()) + " material names were given");
  }
  std::vector<int> cols;
  cols.reserve(names.size());
  for (const auto& n : names) cols.push_back(lib.material_index(n));

  HyperCube cube(labels.rows, labels.cols, lib.bands());
  for (int r = 0; r < labels.rows; ++r) {
    for (int c = 0; c < labels.cols; ++c) {
      const int m = cols[labels.at(r, c)];
      double* dst = &cube.values[(static_cast<std::size_t>(r) * labels.cols + c) * cube.bands];
      for (int b = 0; b < cube.bands; ++b) dst[b] = lib.reflectance(b, m);
    }
  }
  return cube;
}

Matrix reference_abundances(const LabelMap& labels, const Matrix& kernel, int k) {
  // One-hot class indicators pushed through the same linear pipeline as the
  // scene itself, so the clean scene stays an exact mixture of signatures.
  HyperCube indicators(labels.rows, labels.cols, labels.class_count);
  for (int r = 0; r < labels.rows; ++r) {
    for (int c = 0; c < labels.cols; ++c) {
      indicators.at(r, c, labels.at(r, c)) = 1.0;
    }
  }
  const HyperCube low = downsample(filter_cube(indicators, kernel), k);
  const int n = low.rows * low.cols;
  Matrix V(n, labels.class_count);
  for (int r = 0; r < low.rows; ++r) {
    for (int c = 0; c < low.cols; ++c) {
      for (int cls = 0; cls < labels.class_count; ++cls) {
        V(r * low.cols + c, cls) = low.at(r, c, cls);
      }
    }
  }
  return V;
}

std::pair<Matrix, NoiseStats> add_noise_snr(const Matrix& X, double snr_db,
                                            std::uint64_t seed) {
  NoiseStats stats;
  stats.target_snr_db = snr_db;
  if (std::isinf(snr_db) && snr_db > 0) {
    stats.realized_snr_db = snr_db;
    return {X, stats};
  }
  const double signal_power = X.squaredNorm();
  if (signal_power <= 0.0) {
    throw ConfigError("add_noise_snr: all-zero signal, SNR undefined");
  }
  const double count = static_cast<double>(X.size());
  const double sigma = std::sqrt(signal_power / (count * std::pow(10.0, snr_db / 10.0)));

  Rng rng(seed);
  Matrix out(X.rows(), X.cols());
  double noise_power = 0.0;
  std::size_t clamped = 0;
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
      const double w = sigma * rng.gaussian();
      noise_power += w * w;
      double v = X(r, c) + w;
      if (v < 0.0) {
        v = 0.0;
        ++clamped;
      }
      out(r, c) = v;
    }
  }
  stats.realized_snr_db = 10.0 * std::log10(signal_power / noise_power);
  stats.clamped_fraction = static_cast<double>(clamped) / count;
  return {out, stats};
}

SimulatedScene simulate(const SceneConfig& config, const SpectralLibrary& lib,
                        const LabelMap& labels) {
  if (config.scale_factor < 1) {
    throw ConfigError("scene config: scale_factor must be >= 1");
  }
  if (!(config.filter_sigma > 0.0)) {
    throw ConfigError("scene config: filter_sigma must be positive");
  }
  if (config.material_names.empty()) {
    throw ConfigError("scene config: material_names is empty");
  }

  const Matrix kernel = gaussian_kernel(config.scale_factor, config.filter_sigma);
  const HyperCube assigned = assign_signatures(labels, lib, config.material_names);
  const HyperCube low = downsample(filter_cube(assigned, kernel), config.scale_factor);
  const Matrix clean = flatten(low);

  SimulatedScene scene;
  scene.low_rows = low.rows;
  scene.low_cols = low.cols;
  scene.config = config;
  scene.true_abundances = reference_abundances(labels, kernel, config.scale_factor);

  const int p = static_cast<int>(config.material_names.size());
  scene.true_endmembers.resize(lib.bands(), p);
  for (int i = 0; i < p; ++i) {
    scene.true_endmembers.col(i) = lib.signature(config.material_names[i]);
  }

  auto [noisy, stats] = add_noise_snr(clean, config.snr_db, config.seed);
  scene.observed = std::move(noisy);
  scene.noise_stats = stats;
  return scene;
}

}  // namespace hsunmix
