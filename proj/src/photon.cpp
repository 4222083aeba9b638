#include "qls/photon.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "qls/error.hpp"

namespace qls {

namespace {

constexpr double kPi = std::numbers::pi;

// log |s_{2m}|^2 of the squeezed vacuum.
double squeezed_log_prob(int m, double log_t, double log_cosh) {
  return 2.0 * m * log_t + std::lgamma(2.0 * m + 1.0) - 2.0 * m * std::log(2.0) -
         2.0 * std::lgamma(m + 1.0) - log_cosh;
}

double poisson_log_prob(int n, double mean) {
  if (mean == 0.0) return n == 0 ? 0.0 : -INFINITY;
  return -mean + n * std::log(mean) - std::lgamma(n + 1.0);
}

// Photon-number probability p(n) of the untruncated state.
double number_probability(const PhotonSpec& spec, int n) {
  switch (spec.kind) {
    case PhotonKind::SqueezedVacuum: {
      if (n % 2 != 0) return 0.0;
      const double t = std::tanh(spec.r);
      if (t == 0.0) return n == 0 ? 1.0 : 0.0;
      return std::exp(squeezed_log_prob(n / 2, std::log(t), std::log(std::cosh(spec.r))));
    }
    case PhotonKind::Coherent:
      return std::exp(poisson_log_prob(n, std::norm(spec.alpha)));
    case PhotonKind::Fock:
      return n == spec.n_fock ? 1.0 : 0.0;
  }
  return 0.0;
}

// Mass of the distribution above n_max (exclusive), summed until the
// terms become negligible. Terms are eventually monotonically decreasing
// for all supported states.
double upper_tail(const PhotonSpec& spec, int n_max) {
  if (spec.kind == PhotonKind::Fock) return spec.n_fock > n_max ? 1.0 : 0.0;
  if (spec.kind == PhotonKind::SqueezedVacuum && spec.r == 0.0) return 0.0;
  double sum = 0.0;
  const double mean = spec.kind == PhotonKind::Coherent ? std::norm(spec.alpha) : 0.0;
  for (long n = n_max + 1;; ++n) {
    const double p = number_probability(spec, static_cast<int>(n));
    sum += p;
    const bool past_mode = spec.kind != PhotonKind::Coherent || n > mean;
    if (past_mode && n % 2 == 0 && p <= 1e-30 * sum) break;
    if (past_mode && p == 0.0 && spec.kind == PhotonKind::Coherent) break;
    if (n > 50'000'000) break;
  }
  return sum;
}

double lower_tail(const PhotonSpec& spec, int n_min) {
  double sum = 0.0;
  for (int n = 0; n < n_min; ++n) sum += number_probability(spec, n);
  return sum;
}

PhotonAmplitudes finish(const PhotonSpec& spec, const FockBand& band,
                        Eigen::VectorXcd coeffs, double tol) {
  PhotonAmplitudes out{band, std::move(coeffs), 0.0};
  out.truncation_mass = std::max(0.0, lower_tail(spec, band.n_min) + upper_tail(spec, band.n_max));
  if (out.truncation_mass > tol) {
    std::ostringstream msg;
    msg << "photon state mass outside band [" << band.n_min << ", " << band.n_max
        << "] is " << out.truncation_mass << " > " << tol;
    if (upper_tail(spec, band.n_max) > 0.5 * tol)
      msg << "; n_max >= " << required_n_max(spec, 0.5 * tol) << " is required";
    if (band.n_min > 0 && lower_tail(spec, band.n_min) > 0.5 * tol)
      msg << "; n_min must be lowered";
    throw Error(ErrorKind::InvalidParameter, "band-too-small", msg.str());
  }
  return out;
}

}  // namespace

PhotonSpec PhotonSpec::squeezed_vacuum(double r, double phi) {
  if (!(r >= 0.0)) throw invalid_parameter("squeezing r must be >= 0");
  PhotonSpec s;
  s.kind = PhotonKind::SqueezedVacuum;
  s.r = r;
  s.phi = phi;
  return s;
}

PhotonSpec PhotonSpec::coherent(cplx alpha) {
  PhotonSpec s;
  s.kind = PhotonKind::Coherent;
  s.alpha = alpha;
  return s;
}

PhotonSpec PhotonSpec::fock(int n) {
  if (n < 0) throw invalid_parameter("Fock number must be >= 0");
  PhotonSpec s;
  s.kind = PhotonKind::Fock;
  s.n_fock = n;
  return s;
}

int PhotonSpec::parity() const {
  switch (kind) {
    case PhotonKind::SqueezedVacuum: return 1;
    case PhotonKind::Fock: return n_fock % 2 == 0 ? 1 : -1;
    case PhotonKind::Coherent: return 0;
  }
  return 0;
}

cplx PhotonSpec::overlap(cplx a) const {
  switch (kind) {
    case PhotonKind::SqueezedVacuum: return coherent_squeezed_overlap(a, r, phi);
    case PhotonKind::Coherent:
      return std::exp(-0.5 * std::norm(a) - 0.5 * std::norm(alpha) + std::conj(a) * alpha);
    case PhotonKind::Fock: return std::conj(coherent_overlap_fock(n_fock, a));
  }
  return {};
}

cplx coherent_overlap_fock(int n, cplx alpha) {
  if (n < 0) throw invalid_parameter("photon number must be >= 0");
  const double mag = std::abs(alpha);
  if (mag == 0.0) return n == 0 ? cplx{1.0, 0.0} : cplx{};
  const double log_mag = -0.5 * mag * mag + n * std::log(mag) - 0.5 * std::lgamma(n + 1.0);
  return std::polar(std::exp(log_mag), n * std::arg(alpha));
}

Eigen::VectorXcd coherent_overlaps(cplx alpha, const FockBand& band) {
  Eigen::VectorXcd out(band.count());
  const double mag = std::abs(alpha);
  if (mag == 0.0) {
    out.setZero();
    if (band.n_min == 0) out[0] = 1.0;
    return out;
  }
  const double log_r = std::log(mag);
  const double theta = std::arg(alpha);
  double log_mag = -0.5 * mag * mag + band.n_min * log_r - 0.5 * std::lgamma(band.n_min + 1.0);
  for (int k = 0; k < band.count(); ++k) {
    const int n = band.n_min + k;
    if (k > 0) log_mag += log_r - 0.5 * std::log(static_cast<double>(n));
    out[k] = std::polar(std::exp(log_mag), n * theta);
  }
  return out;
}

cplx coherent_squeezed_overlap(cplx alpha, double r, double phi) {
  const double t = std::tanh(r);
  const cplx ac = std::conj(alpha);
  return std::exp(-0.5 * std::norm(alpha) + 0.5 * std::polar(t, phi) * ac * ac) /
         std::sqrt(std::cosh(r));
}

cplx PhotonAmplitudes::overlap(cplx alpha) const {
  return coherent_overlaps(alpha, band).conjugate().cwiseProduct(coeffs).sum();
}

PhotonAmplitudes squeezed_fock_coeffs(double r, double phi, const FockBand& band,
                                      double truncation_tol) {
  if (!(r >= 0.0)) throw invalid_parameter("squeezing r must be >= 0");
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(band.count());
  const double t = std::tanh(r);
  const double log_cosh = std::log(std::cosh(r));
  for (int n = band.n_min + (band.n_min % 2); n <= band.n_max; n += 2) {
    const int m = n / 2;
    if (t == 0.0) {
      if (m == 0) c[n - band.n_min] = 1.0;
      continue;
    }
    const double log_amp = 0.5 * squeezed_log_prob(m, std::log(t), log_cosh);
    c[n - band.n_min] = std::polar(std::exp(log_amp), m * phi);
  }
  return finish(PhotonSpec::squeezed_vacuum(r, phi), band, std::move(c), truncation_tol);
}

PhotonAmplitudes coherent_fock_coeffs(cplx alpha, const FockBand& band,
                                      double truncation_tol) {
  return finish(PhotonSpec::coherent(alpha), band, coherent_overlaps(alpha, band),
                truncation_tol);
}

PhotonAmplitudes fock_coeffs(int n, const FockBand& band) {
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(band.count());
  if (band.contains(n)) c[n - band.n_min] = 1.0;
  return finish(PhotonSpec::fock(n), band, std::move(c), 0.0);
}

PhotonAmplitudes photon_amplitudes(const PhotonSpec& spec, const FockBand& band,
                                   double truncation_tol) {
  switch (spec.kind) {
    case PhotonKind::SqueezedVacuum:
      return squeezed_fock_coeffs(spec.r, spec.phi, band, truncation_tol);
    case PhotonKind::Coherent: return coherent_fock_coeffs(spec.alpha, band, truncation_tol);
    case PhotonKind::Fock: return fock_coeffs(spec.n_fock, band);
  }
  throw invalid_parameter("unknown photon kind");
}

int required_n_max(const PhotonSpec& spec, double tol) {
  int lo = 0;
  if (spec.kind == PhotonKind::Fock) return spec.n_fock;
  if (spec.kind == PhotonKind::Coherent) lo = static_cast<int>(std::norm(spec.alpha));
  int hi = std::max(lo, 1);
  while (upper_tail(spec, hi) > tol) hi *= 2;
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    if (upper_tail(spec, mid) > tol)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

double q_function(cplx alpha, const PhotonSpec& spec) {
  return std::norm(spec.overlap(alpha)) / kPi;
}

double q_function(cplx alpha, const PhotonAmplitudes& state) {
  return std::norm(state.overlap(alpha)) / kPi;
}

// ---------------------------------------------------------------------------

long AlphaQuadrature::mirror_of(std::size_t j) const {
  if (layout.rule != QuadratureRule::Polar || layout.n_angular % 2 != 0) return -1;
  const std::size_t na = static_cast<std::size_t>(layout.n_angular);
  const std::size_t ring = j / na, k = j % na;
  return static_cast<long>(ring * na + (k + na / 2) % na);
}

void gauss_legendre(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  if (n < 1) throw invalid_parameter("Gauss-Legendre order must be >= 1");
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute derivative at the converged root.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    if (n == 1) dp = 1.0;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = weights[n - 1 - i] = w;
  }
  if (n == 1) {
    nodes[0] = 0.0;
    weights[0] = 2.0;
  }
}

double default_rho_max(const FockBand& band) { return std::sqrt(double(band.n_max)) + 6.0; }

AlphaQuadrature polar_quadrature(int n_radial, int n_angular, double rho_max) {
  if (n_radial < 1 || n_angular < 1 || !(rho_max > 0.0))
    throw invalid_parameter("polar quadrature needs n_radial, n_angular >= 1 and rho_max > 0");
  Eigen::VectorXd xi, wi;
  gauss_legendre(n_radial, xi, wi);
  AlphaQuadrature q;
  q.layout = {QuadratureRule::Polar, n_radial, n_angular, rho_max, 0};
  q.nodes.reserve(static_cast<std::size_t>(n_radial) * n_angular);
  for (int i = 0; i < n_radial; ++i) {
    const double rho = 0.5 * rho_max * (1.0 + xi[i]);
    const double w_rho = 0.5 * rho_max * wi[i];
    // d^2 alpha / pi = rho d rho d theta / pi, with d theta = 2 pi / N.
    const double w = w_rho * rho * 2.0 / n_angular;
    for (int k = 0; k < n_angular; ++k)
      q.nodes.push_back({std::polar(rho, 2.0 * kPi * k / n_angular), w});
  }
  return q;
}

namespace {

IdentityCheck worst_entry(const Eigen::MatrixXcd& gram) {
  IdentityCheck c;
  for (int n = 0; n < gram.cols(); ++n)
    for (int m = 0; m < gram.rows(); ++m) {
      const double e = std::abs(gram(m, n) - (m == n ? 1.0 : 0.0));
      if (e > c.max_error) c = {e, m, n};
    }
  return c;
}

}  // namespace

IdentityCheck check_identity_direct(const AlphaQuadrature& quad, const FockBand& band) {
  const int nb = band.count();
  Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(nb, nb);
  for (const auto& node : quad.nodes) {
    const Eigen::VectorXcd v = coherent_overlaps(node.alpha, band);
    gram.noalias() += node.weight * (v * v.adjoint());
  }
  IdentityCheck c = worst_entry(gram);
  c.worst_m += band.n_min;
  c.worst_n += band.n_min;
  return c;
}

IdentityCheck check_identity(const AlphaQuadrature& quad, const FockBand& band) {
  const auto& L = quad.layout;
  if (L.rule != QuadratureRule::Polar) return check_identity_direct(quad, band);
  // Polar product: the angular sum factors out as S(m - n).
  const int nb = band.count();
  const int na = L.n_angular;
  Eigen::MatrixXd g(L.n_radial, nb);
  Eigen::VectorXd ring_weight(L.n_radial);
  for (int i = 0; i < L.n_radial; ++i) {
    const auto& node = quad.nodes[static_cast<std::size_t>(i) * na];
    const double rho = std::abs(node.alpha);
    ring_weight[i] = node.weight;
    const Eigen::VectorXcd v = coherent_overlaps(cplx(rho, 0.0), band);
    g.row(i) = v.real().transpose();
  }
  const Eigen::MatrixXd radial = g.transpose() * ring_weight.asDiagonal() * g;
  std::vector<cplx> angular(2 * nb - 1);
  for (int d = -(nb - 1); d <= nb - 1; ++d) {
    cplx s{};
    for (int k = 0; k < na; ++k) {
      const double th = std::arg(quad.nodes[k].alpha);
      s += std::polar(1.0, d * th);
    }
    angular[d + nb - 1] = s;
  }
  Eigen::MatrixXcd gram(nb, nb);
  for (int n = 0; n < nb; ++n)
    for (int m = 0; m < nb; ++m) gram(m, n) = radial(m, n) * angular[m - n + nb - 1];
  IdentityCheck c = worst_entry(gram);
  c.worst_m += band.n_min;
  c.worst_n += band.n_min;
  return c;
}

int min_angular_nodes(const FockBand& band) { return 2 * band.n_max + 2; }

AlphaQuadrature build_alpha_quadrature(const FockBand& band, int n_radial, int n_angular,
                                       double rho_max, double tol) {
  if (n_radial < 2) throw invalid_parameter("n_radial must be >= 2");
  if (n_angular < min_angular_nodes(band))
    throw invalid_parameter("n_angular = " + std::to_string(n_angular) +
                            " violates the angular rule n_angular >= 2 n_max + 2 = " +
                            std::to_string(min_angular_nodes(band)));
  if (!(rho_max > 0.0)) rho_max = default_rho_max(band);
  AlphaQuadrature q = polar_quadrature(n_radial, n_angular, rho_max);
  const IdentityCheck c = check_identity(q, band);
  if (!c.passed(tol)) {
    std::ostringstream msg;
    msg << "quadrature fails resolution of identity: max error " << c.max_error
        << " at (m,n) = (" << c.worst_m << "," << c.worst_n << ")";
    throw Error(ErrorKind::Numerical, "quadrature-insufficient", msg.str());
  }
  return q;
}

AlphaQuadrature monte_carlo_quadrature(const PhotonSpec& spec, int n_samples,
                                       std::uint64_t seed) {
  if (n_samples < 1) throw invalid_parameter("Monte Carlo sample count must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 2.0 * kPi);
  AlphaQuadrature q;
  q.layout = {QuadratureRule::MonteCarlo, 0, 0, 0.0, seed};
  q.nodes.reserve(n_samples);
  for (int j = 0; j < n_samples; ++j) {
    cplx a;
    switch (spec.kind) {
      case PhotonKind::SqueezedVacuum: {
        // |<a|phi>|^2 ~ exp(-(1-t) u^2 - (1+t) v^2) with u + iv = a e^{-i phi/2}.
        const double t = std::tanh(spec.r);
        const double u = normal(rng) / std::sqrt(2.0 * (1.0 - t));
        const double v = normal(rng) / std::sqrt(2.0 * (1.0 + t));
        a = cplx(u, v) * std::polar(1.0, 0.5 * spec.phi);
        break;
      }
      case PhotonKind::Coherent: {
        const double u = normal(rng) / std::sqrt(2.0), v = normal(rng) / std::sqrt(2.0);
        a = spec.alpha + cplx(u, v);
        break;
      }
      case PhotonKind::Fock: {
        std::gamma_distribution<double> gamma(spec.n_fock + 1.0, 1.0);
        a = std::polar(std::sqrt(gamma(rng)), uniform(rng));
        break;
      }
    }
    q.nodes.push_back({a, 1.0 / (n_samples * std::norm(spec.overlap(a)))});
  }
  return q;
}

AlphaQuadrature single_node_quadrature(cplx alpha, double weight) {
  AlphaQuadrature q;
  q.layout = {QuadratureRule::Custom, 1, 1, std::abs(alpha), 0};
  q.nodes.push_back({alpha, weight});
  return q;
}

}  // namespace qls
