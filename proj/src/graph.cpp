#include "hsunmix/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <vector>

#include "hsunmix/errors.hpp"

namespace hsunmix {

namespace {

using Triplet = Eigen::Triplet<double>;

Eigen::SparseMatrix<double> from_edges(int n, const std::vector<std::pair<int, int>>& edges,
                                       const std::vector<double>& weights) {
  std::vector<Triplet> trips;
  trips.reserve(edges.size() * 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    trips.emplace_back(edges[i].first, edges[i].second, weights[i]);
    trips.emplace_back(edges[i].second, edges[i].first, weights[i]);
  }
  Eigen::SparseMatrix<double> W(n, n);
  W.setFromTriplets(trips.begin(), trips.end());
  return W;
}

}  // namespace

WeightGraph build_spatial_graph(int rows, int cols, int neighbourhood) {
  if (neighbourhood != 4 && neighbourhood != 8) {
    throw ConfigError("spatial graph: neighbourhood must be 4 or 8");
  }
  if (static_cast<std::int64_t>(rows) * cols < 2) {
    throw ConfigError("spatial graph: needs at least 2 pixels");
  }
  const int n = rows * cols;
  std::vector<std::pair<int, int>> edges;
  auto idx = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.emplace_back(idx(r, c), idx(r, c + 1));
      if (r + 1 < rows) edges.emplace_back(idx(r, c), idx(r + 1, c));
      if (neighbourhood == 8 && r + 1 < rows) {
        if (c + 1 < cols) edges.emplace_back(idx(r, c), idx(r + 1, c + 1));
        if (c > 0) edges.emplace_back(idx(r, c), idx(r + 1, c - 1));
      }
    }
  }
  WeightGraph g;
  g.n = n;
  g.weighting = Weighting::kBinary;
  g.construction = "spatial" + std::to_string(neighbourhood) + "(" +
                   std::to_string(rows) + "x" + std::to_string(cols) + ")";
  g.weights = from_edges(n, edges, std::vector<double>(edges.size(), 1.0));
  return g;
}

WeightGraph build_knn_graph(const Matrix& X, int p, Weighting weighting,
                            std::optional<double> sigma_h) {
  const int n = static_cast<int>(X.cols());
  if (p < 1 || p >= n) {
    throw ConfigError("knn graph: p must satisfy 1 <= p < N (p=" + std::to_string(p) +
                      ", N=" + std::to_string(n) + ")");
  }
  if (sigma_h && !(*sigma_h > 0.0)) {
    throw ConfigError("knn graph: sigma_h must be positive");
  }
  if (weighting == Weighting::kDotProduct) {
    for (int j = 0; j < n; ++j) {
      if (X.col(j).norm() == 0.0) {
        throw ConfigError("knn graph: zero-norm column " + std::to_string(j) +
                          " under dot-product weighting");
      }
    }
  }

  std::vector<std::pair<int, int>> edges;
  std::vector<int> order(n - 1);
  Vector d2(n);
  for (int j = 0; j < n; ++j) {
    for (int l = 0; l < n; ++l) {
      d2(l) = (X.col(j) - X.col(l)).squaredNorm();
    }
    int m = 0;
    for (int l = 0; l < n; ++l) {
      if (l != j) order[m++] = l;
    }
    // ties broken by lower index: sort key is (distance, index)
    std::partial_sort(order.begin(), order.begin() + p, order.end(),
                      [&d2](int a, int b) {
                        return d2(a) < d2(b) || (d2(a) == d2(b) && a < b);
                      });
    for (int t = 0; t < p; ++t) {
      const int l = order[t];
      edges.emplace_back(std::min(j, l), std::max(j, l));
    }
  }
  // union symmetrization: keep each undirected pair once
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::vector<double> weights(edges.size(), 1.0);
  if (weighting == Weighting::kHeatKernel) {
    std::vector<double> d2(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i) {
      d2[i] = (X.col(edges[i].first) - X.col(edges[i].second)).squaredNorm();
    }
    double sh;
    if (sigma_h) {
      sh = *sigma_h;
    } else {
      sh = std::accumulate(d2.begin(), d2.end(), 0.0) / static_cast<double>(d2.size());
      if (!(sh > 0.0)) sh = 1.0;  // all retained edges between identical points
    }
    for (std::size_t i = 0; i < edges.size(); ++i) weights[i] = std::exp(-d2[i] / sh);
  } else if (weighting == Weighting::kDotProduct) {
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const auto& a = X.col(edges[i].first);
      const auto& b = X.col(edges[i].second);
      weights[i] = std::max(0.0, a.dot(b) / (a.norm() * b.norm()));
    }
  }

  WeightGraph g;
  g.n = n;
  g.weighting = weighting;
  g.construction = "knn(p=" + std::to_string(p) + ")";
  g.weights = from_edges(n, edges, weights);
  return g;
}

GraphLaplacian laplacian(const WeightGraph& g) {
  GraphLaplacian lap;
  lap.degree = g.weights * Vector::Ones(g.n);
  Eigen::SparseMatrix<double> D(g.n, g.n);
  std::vector<Triplet> trips;
  trips.reserve(g.n);
  for (int j = 0; j < g.n; ++j) trips.emplace_back(j, j, lap.degree(j));
  D.setFromTriplets(trips.begin(), trips.end());
  lap.matrix = D - g.weights;
  return lap;
}

double regularizer_value(const Matrix& V, const GraphLaplacian& lap) {
  if (V.rows() != lap.matrix.rows()) {
    throw ConfigError("regularizer: V has " + std::to_string(V.rows()) +
                      " rows but the graph has " + std::to_string(lap.matrix.rows()) +
                      " nodes");
  }
  const double value = V.cwiseProduct(lap.matrix * V).sum();
  return std::max(value, 0.0);
}

void write_edge_list(const WeightGraph& g, std::ostream& os) {
  os.precision(17);
  for (int k = 0; k < g.weights.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(g.weights, k); it; ++it) {
      if (it.row() < it.col()) {
        os << it.row() << ',' << it.col() << ',' << it.value() << '\n';
      }
    }
  }
}

}  // namespace hsunmix
