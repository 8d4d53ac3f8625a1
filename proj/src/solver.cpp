#include "hsunmix/solver.hpp"

#include <algorithm>
#include <cmath>

#include "hsunmix/errors.hpp"
#include "hsunmix/rng.hpp"

namespace hsunmix {

double objective_nmf(const Matrix& X, const Matrix& U, const Matrix& V) {
  if (U.rows() != X.rows() || V.rows() != X.cols() || U.cols() != V.cols()) {
    throw ConfigError("objective: factor shapes do not match X");
  }
  return (X - U * V.transpose()).squaredNorm();
}

double objective_gnmf(const Matrix& X, const Matrix& U, const Matrix& V,
                      const GraphLaplacian& lap, double lambda) {
  return objective_nmf(X, U, V) + lambda * regularizer_value(V, lap);
}

std::pair<Matrix, Matrix> init_factors(int bands, int pixels, int p,
                                       std::uint64_t seed) {
  if (p < 1 || p > std::min(bands, pixels)) {
    throw ConfigError("init_factors: p must satisfy 1 <= p <= min(L,N), got " +
                      std::to_string(p));
  }
  Rng rng(seed);
  Matrix U(bands, p);
  for (int r = 0; r < bands; ++r) {
    for (int c = 0; c < p; ++c) U(r, c) = rng.uniform_open_closed();
  }
  Matrix V(pixels, p);
  for (int r = 0; r < pixels; ++r) {
    for (int c = 0; c < p; ++c) V(r, c) = rng.uniform_open_closed();
  }
  return {U, asc_normalize(V)};
}

Matrix asc_normalize(const Matrix& V, std::size_t* degenerate) {
  Matrix out(V.rows(), V.cols());
  const double uniform = 1.0 / static_cast<double>(V.cols());
  std::size_t zeros = 0;
  for (Eigen::Index r = 0; r < V.rows(); ++r) {
    const double s = V.row(r).sum();
    if (s > 0.0) {
      out.row(r) = V.row(r) / s;
    } else {
      out.row(r).setConstant(uniform);
      ++zeros;
    }
  }
  if (degenerate) *degenerate += zeros;
  return out;
}

void gnmf_step(const Matrix& X, Matrix& U, Matrix& V, const WeightGraph* graph,
               const Vector* degree, double lambda, double eps) {
  const bool regularized = lambda > 0.0 && graph != nullptr;

  Matrix num_u = X * V;                               // L x P
  Matrix den_u = U * (V.transpose() * V);             // L x P
  den_u.array() += eps;
  U = U.cwiseProduct(num_u).cwiseQuotient(den_u);

  Matrix num_v = X.transpose() * U;                   // N x P
  Matrix den_v = V * (U.transpose() * U);             // N x P
  if (regularized) {
    num_v.noalias() += lambda * (graph->weights * V);
    den_v.noalias() += lambda * (degree->asDiagonal() * V);
  }
  den_v.array() += eps;
  V = V.cwiseProduct(num_v).cwiseQuotient(den_v);
}

Factorization solve(const Matrix& X, const WeightGraph* graph,
                    const SolverOptions& opts, const IterationObserver& observer) {
  if (opts.p_endmembers < 1) throw ConfigError("solver: p_endmembers must be >= 1");
  if (opts.max_iter < 0) throw ConfigError("solver: max_iter must be >= 0");
  if (!(opts.rel_tol > 0.0)) throw ConfigError("solver: rel_tol must be positive");
  if (!(opts.epsilon_guard > 0.0)) throw ConfigError("solver: epsilon_guard must be positive");
  if (opts.lambda < 0.0) throw ConfigError("solver: lambda must be nonnegative");
  if (opts.lambda > 0.0 && graph == nullptr) {
    throw ConfigError("solver: lambda > 0 requires a graph");
  }
  if (graph != nullptr && graph->n != X.cols()) {
    throw ConfigError("solver: graph has " + std::to_string(graph->n) +
                      " nodes but X has " + std::to_string(X.cols()) + " pixels");
  }
  require_nonnegative(X, "solver input X");

  const int bands = static_cast<int>(X.rows());
  const int pixels = static_cast<int>(X.cols());

  GraphLaplacian lap;
  const Vector* degree = nullptr;
  const bool regularized = opts.lambda > 0.0 && graph != nullptr;
  if (regularized) {
    lap = laplacian(*graph);
    degree = &lap.degree;
  }

  Factorization fact;
  auto [U, V] = init_factors(bands, pixels, opts.p_endmembers, opts.seed);

  auto objective = [&](const Matrix& u, const Matrix& v) {
    return regularized ? objective_gnmf(X, u, v, lap, opts.lambda)
                       : objective_nmf(X, u, v);
  };

  double prev = objective(U, V);
  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    gnmf_step(X, U, V, graph, degree, opts.lambda, opts.epsilon_guard);
    if (opts.asc) V = asc_normalize(V, &fact.degenerate_rows);
    if (!U.allFinite() || !V.allFinite()) {
      throw NumericalError("solver: non-finite factor entries at iteration " +
                           std::to_string(iter), iter);
    }
    const double obj = objective(U, V);
    fact.objective_trace.push_back(obj);
    fact.iterations_run = iter;
    if (observer) observer(iter, U, V);

    const double rel = std::abs(prev - obj) / std::max(prev, opts.epsilon_guard);
    prev = obj;
    if (rel < opts.rel_tol) {
      fact.converged = true;
      break;
    }
  }

  fact.endmembers = std::move(U);
  fact.abundances = std::move(V);
  return fact;
}

}  // namespace hsunmix
