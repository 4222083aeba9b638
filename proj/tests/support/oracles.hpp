#pragma once

// Dense reference constructions shared by the unit and acceptance tests.

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "qls/model.hpp"

namespace qls::oracle {

using cplx = std::complex<double>;
inline const cplx I{0.0, 1.0};

inline Eigen::MatrixXd dense_atomic(const AtomModel& atom) {
  const auto& g = atom.grid;
  const int n = g.size();
  const double inv = 1.0 / (g.dx() * g.dx());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    h(i, i) = inv + atom_potential(g.x(i), atom.softcore_a);
    if (i + 1 < n) h(i, i + 1) = h(i + 1, i) = -0.5 * inv;
  }
  return h;
}

inline Eigen::MatrixXcd cayley(const Eigen::MatrixXcd& h, double tau) {
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(h.rows(), h.cols());
  return (id + 0.5 * I * tau * h).partialPivLu().solve(id - 0.5 * I * tau * h);
}

// Joint operators on grid x band, index i + nx * (n - n_min).
inline Eigen::MatrixXcd joint_atomic(const AtomModel& atom, const FockBand& band) {
  const int nx = atom.grid.size();
  const Eigen::MatrixXd ha = dense_atomic(atom);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(nx * band.count(), nx * band.count());
  for (int j = 0; j < band.count(); ++j) h.block(j * nx, j * nx, nx, nx) = ha;
  return h;
}

// i f eps x (a e^{-iwt} - a^dag e^{iwt})
inline Eigen::MatrixXcd joint_interaction(const AtomModel& atom, const FockBand& band,
                                          const FieldParams& fp, double f, double t) {
  const int nx = atom.grid.size();
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(nx * band.count(), nx * band.count());
  for (int n = band.n_min; n < band.n_max; ++n) {
    const int j = n - band.n_min;
    const double s = std::sqrt(n + 1.0);
    for (int i = 0; i < nx; ++i) {
      const double x = atom.grid.x(i);
      h(i + nx * j, i + nx * (j + 1)) = I * f * fp.eps_v * x * s * std::exp(-I * fp.omega * t);
      h(i + nx * (j + 1), i + nx * j) = -I * f * fp.eps_v * x * s * std::exp(I * fp.omega * t);
    }
  }
  return h;
}

// S(r, phi)|0> from the exponential of the truncated generator,
// exp(G) = V exp(i lambda) V^dag with G = i H, H Hermitian.
inline Eigen::VectorXcd squeezed_vacuum(double r, double phi, int n_trunc) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n_trunc, n_trunc);
  for (int n = 1; n < n_trunc; ++n) a(n - 1, n) = std::sqrt(double(n));
  const Eigen::MatrixXcd a2 = a * a;
  const Eigen::MatrixXcd g = 0.5 * r * (std::exp(I * phi) * a2.adjoint() - std::exp(-I * phi) * a2);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Eigen::MatrixXcd(-I * g));
  const Eigen::VectorXcd ph = (I * es.eigenvalues().cast<cplx>()).array().exp();
  const Eigen::MatrixXcd v = es.eigenvectors();
  return v * ph.asDiagonal() * v.adjoint().col(0);
}

inline double window_profile(double de, double gamma, int m) {
  const double g2m = std::pow(gamma, 2 * m);
  return g2m / (std::pow(de, 2 * m) + g2m);
}

inline Eigen::MatrixXcd random_state(int rows, int cols, unsigned seed) {
  std::srand(seed);
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Random(rows, cols);
  return c / c.norm();
}

}  // namespace qls::oracle
