#pragma once

// Tridiagonal kernels used by every propagator and by the window operator.
// Convention: for row i, sub[i] multiplies x[i-1] (sub[0] unused) and sup[i]
// multiplies x[i+1] (sup[n-1] unused).

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <vector>

namespace qls {

using cplx = std::complex<double>;

// In-place Thomas solve without pivoting; `work` holds n scratch entries.
// Adequate for the shifted-Hermitian systems used here (I + i tau H and
// H - z with Im z != 0), whose leading minors never vanish.
template <typename Scalar>
void thomas_solve(std::span<const Scalar> sub, std::span<const Scalar> diag,
                  std::span<const Scalar> sup, std::span<Scalar> x,
                  std::span<Scalar> work) {
  const std::size_t n = diag.size();
  Scalar denom = diag[0];
  x[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    work[i - 1] = sup[i - 1] / denom;
    denom = diag[i] - sub[i] * work[i - 1];
    x[i] = (x[i] - sub[i] * x[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= work[i] * x[i + 1];
}

// Factorization of a fixed tridiagonal matrix for repeated solves.
template <typename Scalar>
class TridiagonalLU {
 public:
  TridiagonalLU() = default;
  TridiagonalLU(std::span<const Scalar> sub, std::span<const Scalar> diag,
                std::span<const Scalar> sup)
      : sub_(sub.begin(), sub.end()),
        upper_(diag.size()),
        inv_denom_(diag.size()) {
    const std::size_t n = diag.size();
    Scalar denom = diag[0];
    inv_denom_[0] = Scalar(1) / denom;
    for (std::size_t i = 1; i < n; ++i) {
      upper_[i - 1] = sup[i - 1] * inv_denom_[i - 1];
      denom = diag[i] - sub[i] * upper_[i - 1];
      inv_denom_[i] = Scalar(1) / denom;
    }
  }

  std::size_t size() const { return inv_denom_.size(); }

  void solve_in_place(std::span<Scalar> x) const {
    const std::size_t n = inv_denom_.size();
    x[0] *= inv_denom_[0];
    for (std::size_t i = 1; i < n; ++i)
      x[i] = (x[i] - sub_[i] * x[i - 1]) * inv_denom_[i];
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= upper_[i] * x[i + 1];
  }

 private:
  std::vector<Scalar> sub_;
  std::vector<Scalar> upper_;
  std::vector<Scalar> inv_denom_;
};

// Real symmetric tridiagonal matrix: diagonal d and off-diagonal e (e[i]
// couples i and i+1).
struct SymTridiagonal {
  Eigen::VectorXd diag;
  Eigen::VectorXd off;

  int size() const { return static_cast<int>(diag.size()); }
  // Number of eigenvalues strictly below `x` (Sturm sequence).
  int count_below(double x) const;
  // k-th smallest eigenvalue (0-based) by bisection to `tol`.
  double eigenvalue(int k, double tol = 1e-14) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
};

struct EigenPair {
  double value;
  Eigen::VectorXd vector;  // unit Euclidean norm
};

// Lowest `count` eigenpairs: bisection for the values, shifted inverse
// iteration for the vectors. Throws a numerical error on non-convergence.
std::vector<EigenPair> lowest_eigenpairs(const SymTridiagonal& m, int count,
                                         double tol = 1e-12,
                                         int max_iterations = 50);

}  // namespace qls
