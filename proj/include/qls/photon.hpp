#pragma once

// Single-mode photon states: Fock expansions of coherent and squeezed-vacuum
// states, coherent-state overlaps, the Husimi Q function and quadrature
// rules over the alpha plane.
//
// Squeezing phase convention: the squeezed vacuum is
//   exp[(r/2)(e^{i phi} a^dag^2 - e^{-i phi} a^2)] |0>,
// so at phi = 0 the anti-squeezed quadrature lies along real alpha, whose
// classical drive is 2|alpha| eps_v sin(omega t).

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "qls/model.hpp"

namespace qls {

using cplx = std::complex<double>;

enum class PhotonKind { SqueezedVacuum, Coherent, Fock };

struct PhotonSpec {
  PhotonKind kind = PhotonKind::SqueezedVacuum;
  double r = 0.0;
  double phi = 0.0;
  cplx alpha{0.0, 0.0};
  int n_fock = 0;

  static PhotonSpec squeezed_vacuum(double r, double phi = 0.0);
  static PhotonSpec coherent(cplx alpha);
  static PhotonSpec fock(int n);

  // <alpha|phi_gamma>, closed form.
  cplx overlap(cplx alpha) const;
  // True when the state has definite photon-number parity (+1 or -1).
  bool has_definite_parity() const { return kind != PhotonKind::Coherent; }
  int parity() const;
};

// <n|alpha> = exp(-|alpha|^2/2) alpha^n / sqrt(n!), in the log domain.
cplx coherent_overlap_fock(int n, cplx alpha);
// <n|alpha> for every n in the band.
Eigen::VectorXcd coherent_overlaps(cplx alpha, const FockBand& band);

cplx coherent_squeezed_overlap(cplx alpha, double r, double phi);

struct PhotonAmplitudes {
  FockBand band;
  Eigen::VectorXcd coeffs;  // s_n for n = band.n_min .. band.n_max
  double truncation_mass = 0.0;

  cplx operator[](int n) const {
    return band.contains(n) ? coeffs[n - band.n_min] : cplx{};
  }
  Eigen::VectorXd probabilities() const { return coeffs.cwiseAbs2(); }
  // <alpha|phi> from the truncated expansion.
  cplx overlap(cplx alpha) const;
};

inline constexpr double kDefaultTruncationTol = 1e-10;

// Throws Error{"band-too-small"} when the mass outside the band exceeds
// `truncation_tol`; the message names the n_max that would suffice.
PhotonAmplitudes squeezed_fock_coeffs(double r, double phi, const FockBand& band,
                                      double truncation_tol = kDefaultTruncationTol);
PhotonAmplitudes coherent_fock_coeffs(cplx alpha, const FockBand& band,
                                      double truncation_tol = kDefaultTruncationTol);
PhotonAmplitudes fock_coeffs(int n, const FockBand& band);
PhotonAmplitudes photon_amplitudes(const PhotonSpec& spec, const FockBand& band,
                                   double truncation_tol = kDefaultTruncationTol);

// Smallest n_max whose tail mass above it is below `tol`.
int required_n_max(const PhotonSpec& spec, double tol);

double q_function(cplx alpha, const PhotonSpec& spec);
double q_function(cplx alpha, const PhotonAmplitudes& state);

// ---------------------------------------------------------------------------
// Alpha-plane quadrature. Weights discretize d^2 alpha / pi.

struct QuadratureNode {
  cplx alpha;
  double weight;
};

enum class QuadratureRule { Polar, MonteCarlo, Custom };

struct QuadratureLayout {
  QuadratureRule rule = QuadratureRule::Custom;
  int n_radial = 0;
  int n_angular = 0;
  double rho_max = 0.0;
  std::uint64_t seed = 0;
};

struct AlphaQuadrature {
  std::vector<QuadratureNode> nodes;
  QuadratureLayout layout;

  std::size_t size() const { return nodes.size(); }
  // Index of the node at -alpha, or -1. Defined for polar rules with an
  // even angular count, where nodes are stored radial-major.
  long mirror_of(std::size_t j) const;
};

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

double default_rho_max(const FockBand& band);

// Polar-product rule: uniform angles (periodic trapezoid) times a
// Gauss-Legendre radial rule on [0, rho_max]. No checks.
AlphaQuadrature polar_quadrature(int n_radial, int n_angular, double rho_max);

struct IdentityCheck {
  double max_error = 0.0;
  int worst_m = 0;
  int worst_n = 0;
  bool passed(double tol) const { return max_error <= tol; }
};

// max_{m,n in band} |sum_j w_j <m|a_j><a_j|n> - delta_mn|.
IdentityCheck check_identity(const AlphaQuadrature& quad, const FockBand& band);
// Same quantity by brute-force summation over every node (test oracle and
// fallback for non-polar layouts).
IdentityCheck check_identity_direct(const AlphaQuadrature& quad,
                                    const FockBand& band);

inline constexpr double kIdentityTol = 1e-8;

int min_angular_nodes(const FockBand& band);

// Polar rule with the angular precondition n_angular >= 2 n_max + 2 and the
// resolution-of-identity gate enforced. rho_max <= 0 selects the default.
AlphaQuadrature build_alpha_quadrature(const FockBand& band, int n_radial,
                                       int n_angular, double rho_max = 0.0,
                                       double tol = kIdentityTol);

// Importance-sampled rule drawing alpha from Q; weights are
// 1 / (N |<alpha|phi>|^2) so that sum_j w_j |<a_j|phi>|^2 g(a_j) is the
// sample mean of g. Valid for Q-weighted integrals only.
AlphaQuadrature monte_carlo_quadrature(const PhotonSpec& spec, int n_samples,
                                       std::uint64_t seed);

// A single node carrying the whole measure (delta-like Q).
AlphaQuadrature single_node_quadrature(cplx alpha, double weight);

}  // namespace qls
