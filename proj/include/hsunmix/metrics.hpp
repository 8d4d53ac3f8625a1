#pragma once

#include <string>
#include <vector>

#include "hsunmix/types.hpp"

namespace hsunmix {

/// Matched-permutation evaluation summary. permutation[j] is the true
/// endmember index paired with estimated column j; per_endmember_sad_deg is
/// indexed by true endmember.
struct EvalReport {
  std::string method_label;
  std::vector<int> permutation;
  std::vector<double> per_endmember_sad_deg;
  double rms_sad_deg = 0.0;
  double rms_aad_deg = 0.0;
  std::size_t aad_degenerate_pixels = 0;
};

/// Spectral angle in radians: arccos of cosine similarity, argument clamped
/// to [-1, 1]. Throws ConfigError on a zero-norm input.
double sad(const Vector& a, const Vector& b);

/// Same angle over abundance vectors; degenerate rule: both zero -> 0,
/// exactly one zero -> pi/2 (flagged through `degenerate`).
double aad(const Vector& a, const Vector& b, bool* degenerate = nullptr);

/// Bijection minimizing total SAD between column pairs, perm[est] = true.
std::vector<int> match_endmembers(const Matrix& U_true, const Matrix& U_est);

std::vector<double> per_endmember_sad_degrees(const Matrix& U_true,
                                              const Matrix& U_est,
                                              const std::vector<int>& perm);

/// sqrt(mean of squared per-endmember SAD), degrees.
double rms_sad_degrees(const Matrix& U_true, const Matrix& U_est,
                       const std::vector<int>& perm);

/// sqrt(mean of squared per-pixel AAD) after aligning estimated columns
/// through perm, degrees.
double rms_aad_degrees(const Matrix& V_true, const Matrix& V_est,
                       const std::vector<int>& perm,
                       std::size_t* degenerate_count = nullptr);

EvalReport evaluate(const Matrix& U_true, const Matrix& V_true,
                    const Matrix& U_est, const Matrix& V_est,
                    const std::string& label);

}  // namespace hsunmix
