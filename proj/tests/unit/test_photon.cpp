#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "qls/ensembles.hpp"
#include "qls/error.hpp"
#include "qls/photon.hpp"
#include "support/oracles.hpp"

using namespace qls;

using qls::oracle::I;

TEST_SUITE("photon") {

TEST_CASE("squeezed vacuum coefficients match the truncated squeeze exponential") {
  struct Case { double r, phi; int n_max, n_trunc; };
  for (const Case c : {Case{0.8, 0.0, 60, 300}, Case{0.8, 0.7, 60, 300}, Case{1.5, -2.0, 220, 600}}) {
    const Eigen::VectorXcd ref = oracle::squeezed_vacuum(c.r, c.phi, c.n_trunc);
    const PhotonAmplitudes s = squeezed_fock_coeffs(c.r, c.phi, FockBand(0, c.n_max));
    double err = 0.0;
    for (int n = 0; n <= c.n_max; ++n) err = std::max(err, std::abs(s[n] - ref[n]));
    CHECK(err < 1e-9);
    for (int n = 1; n <= c.n_max; n += 2) CHECK(s[n] == cplx{});
    CHECK(s.truncation_mass < kDefaultTruncationTol);
  }
}

TEST_CASE("anti-squeezed quadrature lies along real alpha at phi = 0") {
  const PhotonSpec sv = PhotonSpec::squeezed_vacuum(1.0);
  CHECK(std::abs(sv.overlap(2.0)) > 10.0 * std::abs(sv.overlap(2.0 * I)));
  CHECK(sv.parity() == 1);
  CHECK(PhotonSpec::fock(3).parity() == -1);
}

TEST_CASE("coherent Fock amplitudes") {
  const cplx alpha(1.3, -0.4);
  double fact = 1.0;
  for (int n = 0; n < 12; ++n) {
    if (n > 0) fact *= n;
    const cplx ref = std::exp(-0.5 * std::norm(alpha)) * std::pow(alpha, n) / std::sqrt(fact);
    CHECK(std::abs(coherent_overlap_fock(n, alpha) - ref) < 1e-14);
  }
  // Large |alpha| stays finite in the log domain.
  const Eigen::VectorXcd v = coherent_overlaps(cplx(30.0, 0.0), FockBand(0, 2500));
  CHECK(v.squaredNorm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("closed-form overlaps agree with the truncated expansions") {
  const FockBand band(0, 120);
  for (const PhotonSpec& spec : {PhotonSpec::squeezed_vacuum(0.8, 0.3), PhotonSpec::coherent(cplx(2.0, 1.0)),
                                 PhotonSpec::fock(5)}) {
    const PhotonAmplitudes amps = photon_amplitudes(spec, band);
    for (cplx alpha : {cplx(0.0, 0.0), cplx(1.5, -0.5), cplx(-2.0, 3.0)})
      CHECK(std::abs(spec.overlap(alpha) - amps.overlap(alpha)) < 1e-10);
  }
}

TEST_CASE("a band that cuts the state is rejected") {
  try {
    squeezed_fock_coeffs(0.8, 0.0, FockBand(0, 10));
    FAIL("expected band-too-small");
  } catch (const Error& e) {
    CHECK(e.tag() == "band-too-small");
  }
  CHECK(required_n_max(PhotonSpec::squeezed_vacuum(0.8), 1e-10) > 10);
}

TEST_CASE("polar quadrature resolves the identity") {
  const FockBand band(0, 20);
  CHECK(min_angular_nodes(band) == 42);
  const AlphaQuadrature q = build_alpha_quadrature(band, 60, 42);
  const IdentityCheck fast = check_identity(q, band);
  const IdentityCheck slow = check_identity_direct(q, band);
  CHECK(fast.max_error < kIdentityTol);
  CHECK(std::abs(fast.max_error - slow.max_error) < 1e-12);
  // Mirror partners sit half a turn apart.
  for (std::size_t j = 0; j < q.size(); j += 17) {
    const long m = q.mirror_of(j);
    REQUIRE(m >= 0);
    CHECK(std::abs(q.nodes[static_cast<std::size_t>(m)].alpha + q.nodes[j].alpha) < 1e-12);
  }
}

TEST_CASE("too few angular nodes alias the identity") {
  const FockBand band(0, 20);
  // N_theta = n_max: the pair (0, 20) differs by one full period.
  const AlphaQuadrature q = polar_quadrature(60, 20, default_rho_max(band));
  const IdentityCheck c = check_identity(q, band);
  CHECK(c.max_error > 1e-3);
  CHECK(std::abs(c.worst_m - c.worst_n) == 20);
  try {
    build_alpha_quadrature(band, 60, 20);
    FAIL("expected a quadrature error");
  } catch (const Error& e) {
    CHECK(e.exit_code() != 0);
  }
}

TEST_CASE("Q function integrates to one") {
  const FockBand band(0, 60);
  const AlphaQuadrature q = build_alpha_quadrature(band, 60, 122);
  const PhotonSpec sv = PhotonSpec::squeezed_vacuum(0.8);
  double total = 0.0;
  for (const auto& node : q.nodes) total += node.weight * std::norm(sv.overlap(node.alpha));
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(q_function(0.0, sv) == doctest::Approx(1.0 / (std::cosh(0.8) * M_PI)).epsilon(1e-12));
}

TEST_CASE("vacuum smearing of the Q-representation photon distribution") {
  const FockBand band(0, 30);
  const AlphaQuadrature q = build_alpha_quadrature(band, 60, 62);
  const Eigen::VectorXd p = qrep_photon_dist(PhotonSpec::coherent(0.0), q, band);
  double err = 0.0;
  for (int n = 0; n <= 30; ++n) err = std::max(err, std::abs(p[n] - std::ldexp(1.0, -(n + 1))));
  CHECK(err < 1e-8);
}

TEST_CASE("Monte Carlo quadrature is seeded and Q-weighted") {
  const PhotonSpec sv = PhotonSpec::squeezed_vacuum(0.8);
  const AlphaQuadrature a = monte_carlo_quadrature(sv, 4096, 11);
  const AlphaQuadrature b = monte_carlo_quadrature(sv, 4096, 11);
  const AlphaQuadrature c = monte_carlo_quadrature(sv, 4096, 12);
  REQUIRE(a.size() == 4096);
  bool same = true, differ = false;
  double mass = 0.0, n_mean = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    same = same && a.nodes[j].alpha == b.nodes[j].alpha && a.nodes[j].weight == b.nodes[j].weight;
    differ = differ || a.nodes[j].alpha != c.nodes[j].alpha;
    const double q = a.nodes[j].weight * std::norm(sv.overlap(a.nodes[j].alpha));
    mass += q;
    n_mean += q * std::norm(a.nodes[j].alpha);
  }
  CHECK(same);
  CHECK(differ);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  // <|alpha|^2>_Q = nbar + 1.
  CHECK(n_mean == doctest::Approx(std::sinh(0.8) * std::sinh(0.8) + 1.0).epsilon(0.05));
}

}  // TEST_SUITE
