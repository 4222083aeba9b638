#include "qls/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qls/error.hpp"

namespace qls {

int SymTridiagonal::count_below(double x) const {
  const int n = size();
  int count = 0;
  double q = diag[0] - x;
  if (q < 0) ++count;
  for (int i = 1; i < n; ++i) {
    if (q == 0.0) q = std::numeric_limits<double>::epsilon() * (std::abs(off[i - 1]) + 1e-300);
    q = diag[i] - x - off[i - 1] * off[i - 1] / q;
    if (q < 0) ++count;
  }
  return count;
}

double SymTridiagonal::eigenvalue(int k, double tol) const {
  const int n = size();
  double lo = diag.minCoeff(), hi = diag.maxCoeff();
  double radius = 0.0;
  for (int i = 0; i + 1 < n; ++i) radius = std::max(radius, 2.0 * std::abs(off[i]));
  lo -= radius;
  hi += radius;
  while (hi - lo > tol * std::max(1.0, std::abs(lo) + std::abs(hi))) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (count_below(mid) > k)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

Eigen::VectorXd SymTridiagonal::apply(const Eigen::VectorXd& v) const {
  const int n = size();
  Eigen::VectorXd out = diag.cwiseProduct(v);
  for (int i = 0; i + 1 < n; ++i) {
    out[i] += off[i] * v[i + 1];
    out[i + 1] += off[i] * v[i];
  }
  return out;
}

std::vector<EigenPair> lowest_eigenpairs(const SymTridiagonal& m, int count,
                                         double tol, int max_iterations) {
  const int n = m.size();
  count = std::min(count, n);
  std::vector<EigenPair> out;
  std::vector<double> sub(n), diag(n), sup(n), work(n);
  for (int k = 0; k < count; ++k) {
    const double lambda = m.eigenvalue(k, 1e-15);
    // Shift slightly off the eigenvalue so the solve stays nonsingular.
    const double shift = lambda - 1e-10 * std::max(1.0, std::abs(lambda));
    for (int i = 0; i < n; ++i) {
      diag[i] = m.diag[i] - shift;
      sub[i] = i > 0 ? m.off[i - 1] : 0.0;
      sup[i] = i + 1 < n ? m.off[i] : 0.0;
    }
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = 1.0 + 0.01 * std::sin(1.0 + i * (k + 1.3));
    double value = lambda;
    double previous = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (int it = 0; it < max_iterations; ++it) {
      for (const auto& p : out) v -= p.vector.dot(v) * p.vector;
      v.normalize();
      thomas_solve<double>(sub, diag, sup, std::span<double>(v.data(), n), work);
      for (const auto& p : out) v -= p.vector.dot(v) * p.vector;
      v.normalize();
      value = v.dot(m.apply(v));
      if (std::abs(value - previous) < tol * std::max(1.0, std::abs(value)) && it >= 2) {
        converged = true;
        break;
      }
      previous = value;
    }
    if (!converged)
      throw numerical_error("eigen-solver",
                            "inverse iteration did not converge for eigenpair " +
                                std::to_string(k));
    out.push_back({value, v});
  }
  return out;
}

}  // namespace qls
