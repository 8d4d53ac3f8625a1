#include "hsunmix/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hsunmix/errors.hpp"

namespace hsunmix {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

// Angle between vectors via 2*atan2(||u-v||, ||u+v||) on the normalized
// pair; unlike acos of the clamped cosine this stays accurate near 0 and
// pi, where acos loses half the significant digits.
double clamped_angle(const Vector& a, const Vector& b) {
  const Vector u = a / a.norm();
  const Vector v = b / b.norm();
  return 2.0 * std::atan2((u - v).norm(), (u + v).norm());
}

// Assignment minimizing total cost, shortest augmenting path with
// potentials. cost is square; returns row index assigned to each column.
std::vector<int> solve_assignment(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);  // 1-based; p[j] = row matched to col j
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_for_col(n);
  for (int j = 1; j <= n; ++j) row_for_col[j - 1] = p[j] - 1;
  return row_for_col;
}

}  // namespace

double sad(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw ConfigError("sad: vector lengths differ");
  }
  if (a.norm() == 0.0 || b.norm() == 0.0) {
    throw ConfigError("sad: zero-norm spectrum");
  }
  return clamped_angle(a, b);
}

double aad(const Vector& a, const Vector& b, bool* degenerate) {
  if (a.size() != b.size()) {
    throw ConfigError("aad: vector lengths differ");
  }
  const bool za = a.norm() == 0.0;
  const bool zb = b.norm() == 0.0;
  if (degenerate) *degenerate = za != zb;
  if (za && zb) return 0.0;
  if (za != zb) return std::numbers::pi / 2.0;
  return clamped_angle(a, b);
}

std::vector<int> match_endmembers(const Matrix& U_true, const Matrix& U_est) {
  if (U_true.cols() != U_est.cols() || U_true.rows() != U_est.rows()) {
    throw ConfigError("match_endmembers: endmember matrices have different shapes");
  }
  const int p = static_cast<int>(U_true.cols());
  Matrix cost(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) cost(i, j) = sad(U_true.col(i), U_est.col(j));
  }
  return solve_assignment(cost);  // perm[est column] = true column
}

std::vector<double> per_endmember_sad_degrees(const Matrix& U_true,
                                              const Matrix& U_est,
                                              const std::vector<int>& perm) {
  const int p = static_cast<int>(U_true.cols());
  std::vector<double> out(p, 0.0);
  for (int j = 0; j < p; ++j) {
    out[perm[j]] = sad(U_true.col(perm[j]), U_est.col(j)) * kRadToDeg;
  }
  return out;
}

double rms_sad_degrees(const Matrix& U_true, const Matrix& U_est,
                       const std::vector<int>& perm) {
  const int p = static_cast<int>(U_true.cols());
  double acc = 0.0;
  for (int j = 0; j < p; ++j) {
    const double angle = sad(U_true.col(perm[j]), U_est.col(j));
    acc += angle * angle;
  }
  return std::sqrt(acc / p) * kRadToDeg;
}

double rms_aad_degrees(const Matrix& V_true, const Matrix& V_est,
                       const std::vector<int>& perm,
                       std::size_t* degenerate_count) {
  if (V_true.rows() != V_est.rows() || V_true.cols() != V_est.cols()) {
    throw ConfigError("rms_aad: abundance matrices have different shapes");
  }
  const int p = static_cast<int>(V_true.cols());
  Matrix aligned(V_est.rows(), p);
  for (int j = 0; j < p; ++j) aligned.col(perm[j]) = V_est.col(j);

  double acc = 0.0;
  std::size_t flagged = 0;
  for (Eigen::Index i = 0; i < V_true.rows(); ++i) {
    bool degenerate = false;
    const double angle = aad(V_true.row(i).transpose(), aligned.row(i).transpose(),
                             &degenerate);
    if (degenerate) ++flagged;
    acc += angle * angle;
  }
  if (degenerate_count) *degenerate_count = flagged;
  return std::sqrt(acc / static_cast<double>(V_true.rows())) * kRadToDeg;
}

EvalReport evaluate(const Matrix& U_true, const Matrix& V_true,
                    const Matrix& U_est, const Matrix& V_est,
                    const std::string& label) {
  if (V_true.cols() != U_true.cols() || V_est.cols() != U_est.cols()) {
    throw ConfigError("evaluate: endmember/abundance column counts disagree");
  }
  EvalReport report;
  report.method_label = label;
  report.permutation = match_endmembers(U_true, U_est);
  report.per_endmember_sad_deg = per_endmember_sad_degrees(U_true, U_est, report.permutation);
  report.rms_sad_deg = rms_sad_degrees(U_true, U_est, report.permutation);
  report.rms_aad_deg =
      rms_aad_degrees(V_true, V_est, report.permutation, &report.aad_degenerate_pixels);
  return report;
}

}  // namespace hsunmix
