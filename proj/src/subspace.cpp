#include "hsunmix/subspace.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>

#include "hsunmix/errors.hpp"

namespace hsunmix {

PcaSpectrum pca_spectrum(const Matrix& X, bool centered) {
  const Eigen::Index bands = X.rows();
  const Eigen::Index pixels = X.cols();
  if (pixels < 2) {
    throw ConfigError("pca: needs at least 2 pixels");
  }

  Matrix second_moment(bands, bands);
  if (centered) {
    const Vector mean = X.rowwise().mean();
    const Matrix centered_x = X.colwise() - mean;
    second_moment = (centered_x * centered_x.transpose()) / static_cast<double>(pixels - 1);
  } else {
    second_moment = (X * X.transpose()) / static_cast<double>(pixels);
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(second_moment);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("pca: eigendecomposition failed", 0);
  }

  PcaSpectrum spec;
  spec.centered = centered;
  spec.eigenvalues = solver.eigenvalues().reverse();  // descending
  spec.eigenvalues = spec.eigenvalues.cwiseMax(0.0);

  const double total = spec.eigenvalues.sum();
  spec.explained.resize(bands);
  if (total > 0.0) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < bands; ++i) {
      acc += spec.eigenvalues(i);
      spec.explained(i) = acc / total;
    }
  } else {
    spec.explained.setOnes();  // rank-0 data: nothing left to explain
  }
  return spec;
}

int estimate_endmember_count(const Matrix& X, double threshold, bool centered) {
  if (!(threshold > 0.0) || threshold > 1.0) {
    throw ConfigError("estimate_endmember_count: threshold must be in (0, 1]");
  }
  const PcaSpectrum spec = pca_spectrum(X, centered);

  // Rank 0 up to rounding: identical pixels leave O(eps^2) residue in the
  // covariance, so compare the eigenvalue mass against the data scale.
  const double scale =
      X.squaredNorm() / static_cast<double>(X.size());
  int components = 0;
  if (spec.eigenvalues.sum() > scale * 1e-24) {
    components = static_cast<int>(spec.explained.size());
    for (Eigen::Index i = 0; i < spec.explained.size(); ++i) {
      if (spec.explained(i) >= threshold) {
        components = static_cast<int>(i) + 1;
        break;
      }
    }
  }
  const int raw = centered ? components + 1 : components;
  const int cap = static_cast<int>(std::min(X.rows(), X.cols()));
  return std::clamp(raw, 1, cap);
}

}  // namespace hsunmix
