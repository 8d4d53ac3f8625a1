#include "hsunmix/types.hpp"

#include <algorithm>
#include <cmath>

#include "hsunmix/errors.hpp"

namespace hsunmix {

int SpectralLibrary::material_index(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) {
    throw ConfigError("spectral library: unknown material '" + name + "'");
  }
  return static_cast<int>(it - names.begin());
}

Vector SpectralLibrary::signature(const std::string& name) const {
  return reflectance.col(material_index(name));
}

HyperCube::HyperCube(int r, int c, int b) : rows(r), cols(c), bands(b) {
  if (r <= 0 || c <= 0 || b <= 0) {
    throw ConfigError("hypercube: dimensions must be positive");
  }
  values.assign(static_cast<std::size_t>(r) * c * b, 0.0);
}

Matrix flatten(const HyperCube& cube) {
  const int n = cube.rows * cube.cols;
  Matrix X(cube.bands, n);
  for (int r = 0; r < cube.rows; ++r) {
    for (int c = 0; c < cube.cols; ++c) {
      const int pixel = r * cube.cols + c;
      for (int b = 0; b < cube.bands; ++b) {
        X(b, pixel) = cube.at(r, c, b);
      }
    }
  }
  return X;
}

HyperCube unflatten(const Matrix& X, int rows, int cols) {
  if (rows <= 0 || cols <= 0 ||
      static_cast<std::int64_t>(rows) * cols != X.cols()) {
    throw ConfigError("unflatten: rows*cols (" + std::to_string(rows) + "x" +
                      std::to_string(cols) + ") does not match pixel count " +
                      std::to_string(X.cols()));
  }
  HyperCube cube(rows, cols, static_cast<int>(X.rows()));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int pixel = r * cols + c;
      for (int b = 0; b < cube.bands; ++b) {
        cube.at(r, c, b) = X(b, pixel);
      }
    }
  }
  return cube;
}

void require_nonnegative(const Matrix& X, const std::string& what) {
  if (!X.allFinite()) {
    throw ConfigError(what + ": non-finite entries");
  }
  if ((X.array() < 0.0).any()) {
    throw ConfigError(what + ": negative entries");
  }
}

}  // namespace hsunmix
