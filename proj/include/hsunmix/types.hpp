#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace hsunmix {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Matrix conventions used throughout:
//   X  bands x pixels (L x N), one column per pixel spectrum
//   U  bands x endmembers (L x P), one column per signature
//   V  pixels x endmembers (N x P), one row per pixel's abundances
// Pixels are indexed row-major: pixel n = r * cols + c.

/// Reflectance library: named material spectra sampled on a shared
/// wavelength grid (micrometers, strictly increasing). Values in [0, 1].
struct SpectralLibrary {
  std::vector<double> wavelengths;
  std::vector<std::string> names;
  Matrix reflectance;  // bands x materials, column order matches names

  int bands() const { return static_cast<int>(wavelengths.size()); }
  int material_count() const { return static_cast<int>(names.size()); }
  /// Index of a material by name; throws ConfigError if absent.
  int material_index(const std::string& name) const;
  /// bands-vector of one material's reflectance.
  Vector signature(const std::string& name) const;
};

/// Image cube, values stored in [row][col][band] order.
struct HyperCube {
  int rows = 0;
  int cols = 0;
  int bands = 0;
  std::vector<double> values;

  HyperCube() = default;
  HyperCube(int r, int c, int b);

  double& at(int r, int c, int b) { return values[(static_cast<std::size_t>(r) * cols + c) * bands + b]; }
  double at(int r, int c, int b) const { return values[(static_cast<std::size_t>(r) * cols + c) * bands + b]; }
};

/// Per-pixel class indices in [0, class_count); every class occurs at
/// least once.
struct LabelMap {
  int rows = 0;
  int cols = 0;
  int class_count = 0;
  std::vector<int> labels;  // row-major

  int at(int r, int c) const { return labels[static_cast<std::size_t>(r) * cols + c]; }
};

/// X[b][r*cols+c] = cube[r][c][b]; L = bands, N = rows*cols.
Matrix flatten(const HyperCube& cube);

/// Inverse of flatten; throws ConfigError when rows*cols != X.cols().
HyperCube unflatten(const Matrix& X, int rows, int cols);

/// Throws ConfigError unless all entries are finite and >= 0.
void require_nonnegative(const Matrix& X, const std::string& what);

}  // namespace hsunmix
