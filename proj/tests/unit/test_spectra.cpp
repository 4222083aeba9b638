#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "qls/spectra.hpp"
#include "support/oracles.hpp"

using namespace qls;

using oracle::dense_atomic;
using oracle::window_profile;

TEST_SUITE("spectra") {

TEST_CASE("window area") {
  CHECK(window_area(1) == doctest::Approx(std::numbers::pi).epsilon(1e-12));
  CHECK(window_area(2) == doctest::Approx(std::numbers::pi / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("window operator matches the dense resolvent") {
  AtomModel atom(SpaceGrid(50.0, 201), 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_atomic(atom));
  std::srand(5);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Random(201);
  psi /= std::sqrt(psi.squaredNorm() * atom.grid.dx());
  const Eigen::VectorXcd proj = es.eigenvectors().cast<std::complex<double>>().adjoint() * psi;
  WindowOperator w(atom);
  for (int m : {1, 2})
    for (double e : {-0.4, 0.3, 1.1}) {
      const double gamma = 0.04;
      double ref = 0.0;
      for (int k = 0; k < 201; ++k) ref += std::norm(proj[k]) * window_profile(es.eigenvalues()[k] - e, gamma, m);
      ref *= atom.grid.dx();
      CHECK(w.expectation(psi, e, gamma, m) == doctest::Approx(ref).epsilon(1e-9));
    }
}

TEST_CASE("bin-normalized windows tile the continuum") {
  AtomModel atom(SpaceGrid(50.0, 201), 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_atomic(atom));
  const EnergyGrid egrid(0.0, 2.5, 126);
  const SpectrumEngine engine(atom, egrid, 8);
  int checked = 0;
  for (int k = 0; k < 201; ++k) {
    const double e = es.eigenvalues()[k];
    if (e < 0.5 || e > 2.0) continue;
    double tiled = 0.0;
    for (int b = 0; b < egrid.size(); ++b) tiled += egrid.bin_weight() * window_profile(e - egrid.energy(b), egrid.gamma(), 2);
    CHECK(std::abs(tiled - 1.0) < 1e-3);
    const Eigen::VectorXcd psi = es.eigenvectors().col(k).cast<std::complex<double>>() / std::sqrt(atom.grid.dx());
    CHECK(std::abs(engine.pes(psi).sum() - 1.0) < 1e-3);
    ++checked;
  }
  CHECK(checked > 10);
}

TEST_CASE("bound states are projected out") {
  AtomModel atom(SpaceGrid(50.0, 201), 2.0);
  const GroundState g = ground_state(atom);
  const EnergyGrid egrid(0.0, 2.5, 126);
  CHECK(pes(g.state, atom, egrid).sum() < 1e-20);
}

TEST_CASE("joint spectrum columns are per-Fock spectra") {
  AtomModel atom(SpaceGrid(30.0, 121), 2.0);
  const EnergyGrid egrid(0.0, 2.0, 41);
  std::srand(9);
  JointState s{atom.grid, FockBand(2, 5), Eigen::MatrixXcd::Random(121, 4), 0.0};
  const Eigen::MatrixXd j = joint_spectrum(s, atom, egrid, 4, 2);
  for (int n = 2; n <= 5; ++n)
    CHECK((j.col(n - 2) - pes(ElectronState{atom.grid, s.column(n)}, atom, egrid, 4)).norm() == 0.0);
  const Eigen::VectorXd pn = photon_distribution(s);
  CHECK(pn.sum() == doctest::Approx(s.norm()).epsilon(1e-13));
}

TEST_CASE("cutoff lines") {
  FieldParams fp(0.114, 0.003);
  const CutoffLines c = cutoff_lines(fp, FockBand(10, 20));
  REQUIRE(c.n.size() == 11);
  for (int k = 0; k < 11; ++k) {
    const int n = 10 + k;
    CHECK(c.n[k] == n);
    CHECK(c.direct[k] == doctest::Approx(2.0 * up_shift(n, fp)));
    CHECK(c.rescatter[k] == doctest::Approx(10.0 * up_shift(n, fp)));
  }
}

TEST_CASE("normalized L1") {
  Eigen::ArrayXd a(4);
  a << 1.0, 2.0, 0.5, 0.0;
  CHECK(normalized_l1(a, a) == 0.0);
  CHECK(normalized_l1(a, 2.0 * a) == doctest::Approx(0.5));
}

TEST_CASE("modulation depth and pair averaging") {
  Eigen::MatrixXd j(2, 6);
  j << 1.0, 0.5, 1.0, 0.5, 1.0, 0.5,
       1.0, 1.0, 1.0, 1.0, 1.0, 1.0;
  CHECK(modulation_depth(j, 0, 0, 5) == doctest::Approx(1.0 / 3.0));
  CHECK(modulation_depth(j, 1, 0, 5) == 0.0);
  const Eigen::MatrixXd avg = pair_average(j);
  CHECK(avg.cols() == 5);
  CHECK(avg(0, 0) == doctest::Approx(0.75));
  CHECK(modulation_depth(avg, 0, 0, 4) == doctest::Approx(0.0));
}

TEST_CASE("ridge tracking recovers a linear tilt") {
  const EnergyGrid egrid(0.0, 1.0, 201);
  const FockBand band(0, 200);
  const double slope = -0.0015, e0 = 0.6, sigma = 0.02;
  Eigen::MatrixXd j(egrid.size(), band.count());
  for (int n = 0; n <= 200; ++n)
    for (int k = 0; k < egrid.size(); ++k) {
      const double d = egrid.energy(k) - (e0 + slope * n);
      j(k, n) = std::exp(-d * d / (2 * sigma * sigma)) * (n % 2 ? 0.0 : 1.0);
    }
  const RidgeFit fit = track_ridge(j, egrid, band, 0, 200, e0, 0.03, 2);
  CHECK(fit.slope == doctest::Approx(slope).epsilon(0.01));
  CHECK(fit.n.size() == 101);
}

}  // TEST_SUITE
