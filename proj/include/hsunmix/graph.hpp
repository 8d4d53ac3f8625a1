#pragma once

#include <Eigen/SparseCore>
#include <iosfwd>
#include <optional>
#include <string>

#include "hsunmix/types.hpp"

namespace hsunmix {

enum class Weighting { kBinary, kHeatKernel, kDotProduct };

/// Symmetric nonnegative pixel-similarity weights with zero diagonal.
struct WeightGraph {
  int n = 0;
  Eigen::SparseMatrix<double> weights;  // n x n
  Weighting weighting = Weighting::kBinary;
  std::string construction;  // e.g. "spatial4(21x21)" or "knn(p=5)"
};

/// degree(j) = sum_l W(j,l);  matrix = diag(degree) - W.
struct GraphLaplacian {
  Vector degree;
  Eigen::SparseMatrix<double> matrix;
};

/// Unit-weight edges between spatially adjacent pixels (4- or
/// 8-neighbourhood), pixels indexed row-major to match flatten.
WeightGraph build_spatial_graph(int rows, int cols, int neighbourhood);

/// p-nearest-neighbour graph over the columns of X (Euclidean metric,
/// distance ties broken by lower index), symmetrized by union. Heat-kernel
/// sigma defaults to the mean squared edge length when not given.
WeightGraph build_knn_graph(const Matrix& X, int p, Weighting weighting,
                            std::optional<double> sigma_h = std::nullopt);

GraphLaplacian laplacian(const WeightGraph& g);

/// Tr(V^T L V); equals half the weighted sum of squared row differences.
double regularizer_value(const Matrix& V, const GraphLaplacian& lap);

/// Debug dump: one "j,l,weight" line per edge with j < l.
void write_edge_list(const WeightGraph& g, std::ostream& os);

}  // namespace hsunmix
