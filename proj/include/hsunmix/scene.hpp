#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hsunmix/types.hpp"

namespace hsunmix {

/// Scene generation recipe: substitute library signatures into a label map,
/// blur with a k x k Gaussian, block-average down by k, add SNR-calibrated
/// noise. snr_db = +infinity disables noise.
struct SceneConfig {
  int scale_factor = 3;
  double filter_sigma = 0.5;
  double snr_db = 30.0;
  std::uint64_t seed = 0;
  std::vector<std::string> material_names;
  std::string label_map_path;
};

struct NoiseStats {
  double target_snr_db = 0.0;
  double realized_snr_db = 0.0;
  double clamped_fraction = 0.0;
};

struct SimulatedScene {
  Matrix observed;          // L x N, noisy low-res, clamped >= 0
  Matrix true_endmembers;   // L x P
  Matrix true_abundances;   // N x P, rows sum to 1
  int low_rows = 0;
  int low_cols = 0;
  SceneConfig config;
  NoiseStats noise_stats;
};

/// k x k kernel with entries exp(-(dr^2+dc^2)/(2 sigma^2)), normalized to
/// sum 1. k must be odd.
Matrix gaussian_kernel(int k, double sigma);

/// Per-band 2-D correlation with reflect padding (edge sample not
/// repeated); output dims unchanged. Kernel must fit in the image.
HyperCube filter_cube(const HyperCube& cube, const Matrix& kernel);

/// Non-overlapping k x k block means; trailing rows/cols that do not fill
/// a block are dropped.
HyperCube downsample(const HyperCube& cube, int k);

/// cube[r][c][:] = reflectance of the material names[labels[r][c]].
HyperCube assign_signatures(const LabelMap& labels, const SpectralLibrary& lib,
                            const std::vector<std::string>& names);

/// Ground-truth abundances: each class indicator image pushed through the
/// same blur + downsample as the scene, stacked per pixel. Rows sum to 1.
Matrix reference_abundances(const LabelMap& labels, const Matrix& kernel, int k);

/// Adds i.i.d. zero-mean Gaussian noise with variance sum(X^2)/(L*N*10^(snr/10)),
/// clamps negatives to zero, and reports realized SNR and the clamped share.
std::pair<Matrix, NoiseStats> add_noise_snr(const Matrix& X, double snr_db,
                                            std::uint64_t seed);

SimulatedScene simulate(const SceneConfig& config, const SpectralLibrary& lib,
                        const LabelMap& labels);

}  // namespace hsunmix
