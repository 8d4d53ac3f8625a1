#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "hsunmix/graph.hpp"
#include "hsunmix/types.hpp"

namespace hsunmix {

struct SolverOptions {
  int p_endmembers = 0;
  double lambda = 0.0;  // 0 gives plain NMF
  int max_iter = 1000;
  double rel_tol = 1e-6;
  std::uint64_t seed = 0;
  bool asc = true;  // renormalize abundance rows to sum 1 each iteration
  double epsilon_guard = 1e-12;
};

struct Factorization {
  Matrix endmembers;  // U, L x P
  Matrix abundances;  // V, N x P
  std::vector<double> objective_trace;  // one entry per completed iteration
  int iterations_run = 0;
  bool converged = false;
  std::size_t degenerate_rows = 0;  // zero-sum rows replaced during ASC
};

/// ||X - U V^T||_F^2
double objective_nmf(const Matrix& X, const Matrix& U, const Matrix& V);

/// objective_nmf + lambda * Tr(V^T L V)
double objective_gnmf(const Matrix& X, const Matrix& U, const Matrix& V,
                      const GraphLaplacian& lap, double lambda);

/// Entries i.i.d. uniform on (0,1]; V rows normalized to sum 1.
std::pair<Matrix, Matrix> init_factors(int bands, int pixels, int p,
                                       std::uint64_t seed);

/// Divides each row by its sum; zero-sum rows become uniform 1/P and are
/// counted through `degenerate` when given.
Matrix asc_normalize(const Matrix& V, std::size_t* degenerate = nullptr);

/// One multiplicative update of U then V:
///   U <- U .* (X V) ./ (U V^T V + eps)
///   V <- V .* (X^T U + lambda W V) ./ (V U^T U + lambda D V + eps)
/// With lambda == 0 (or no graph) the graph terms are skipped entirely and
/// the update is the plain Euclidean NMF step.
void gnmf_step(const Matrix& X, Matrix& U, Matrix& V, const WeightGraph* graph,
               const Vector* degree, double lambda, double eps);

using IterationObserver =
    std::function<void(int iteration, const Matrix& U, const Matrix& V)>;

/// Multiplicative-update loop with optional per-iteration ASC step.
/// Records the objective after each full iteration (post-normalization) and
/// stops on relative objective change < rel_tol or at max_iter. Requires a
/// graph when lambda > 0. Throws NumericalError if factors go non-finite.
Factorization solve(const Matrix& X, const WeightGraph* graph,
                    const SolverOptions& opts,
                    const IterationObserver& observer = {});

}  // namespace hsunmix
