#pragma once

#include "hsunmix/types.hpp"

namespace hsunmix {

/// Eigenvalue spectrum of the pixel-spectra covariance (centered) or
/// second-moment (uncentered) matrix, sorted descending, negatives clamped
/// to zero. explained[i] is the cumulative variance fraction through
/// component i; for all-zero data it is defined as 1 everywhere.
struct PcaSpectrum {
  Vector eigenvalues;
  Vector explained;
  bool centered = true;
};

PcaSpectrum pca_spectrum(const Matrix& X, bool centered);

/// Smallest component count m whose cumulative explained fraction reaches
/// the threshold; centered mode returns m + 1 since sum-to-one data spans
/// an affine subspace of dimension P - 1. Clamped to [1, min(L, N)].
int estimate_endmember_count(const Matrix& X, double threshold = 0.995,
                             bool centered = true);

}  // namespace hsunmix
