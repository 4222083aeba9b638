#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qls/error.hpp"
#include "qls/model.hpp"
#include "qls/spectra.hpp"

using namespace qls;

TEST_SUITE("model") {

TEST_CASE("unit conversions") {
  // 800 nm: hbar omega = 1239.84198 / 800 eV, 1 Ha = 27.211386 eV.
  CHECK(wavelength_to_omega(800.0) == doctest::Approx(1239.84198 / 800.0 / 27.211386).epsilon(1e-6));
  CHECK(omega_to_wavelength(wavelength_to_omega(400.0)) == doctest::Approx(400.0).epsilon(1e-12));
  // 1 a.u. of field is 3.50945e16 W/cm^2.
  CHECK(intensity_to_field(3.50945e16) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("grid is symmetric about the origin") {
  SpaceGrid g(50.0, 101);
  CHECK(g.dx() == doctest::Approx(1.0));
  CHECK(g.x(50) == 0.0);
  for (int i = 0; i < g.size(); ++i) CHECK(g.x(g.mirror(i)) == -g.x(i));
  CHECK_THROWS_AS(SpaceGrid(10.0, 100), Error);
}

TEST_CASE("soft-core potential") {
  CHECK(atom_potential(0.0, 2.0) == doctest::Approx(-1.0 / std::sqrt(2.0)));
  CHECK(atom_potential(3.0, 2.0) == atom_potential(-3.0, 2.0));
}

TEST_CASE("trapezoidal envelope") {
  const double w = 0.5;
  PulseEnvelope env(2, 3, 1, w);
  const double T = 2 * std::numbers::pi / w;
  CHECK(env.duration() == doctest::Approx(6 * T));
  CHECK(env(0.0) == 0.0);
  CHECK(env(T) == doctest::Approx(0.5));
  CHECK(env(3.5 * T) == 1.0);
  CHECK(env(5.5 * T) == doctest::Approx(0.5));
  CHECK(env(6 * T) == 0.0);
}

TEST_CASE("zero-duration pulse is rejected") {
  try {
    PulseEnvelope(0, 0, 2, 0.5);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.tag() == "zero-duration");
    CHECK(e.exit_code() == 2);
  }
  CHECK_NOTHROW(PulseEnvelope(0, 1, 0, 0.5));
}

TEST_CASE("field parameters reproduce the classical amplitude") {
  const double e0 = 0.0534, r = 2.3, w = 0.057;
  const FieldParams fp = derive_field_params(e0, r, w);
  CHECK(2.0 * fp.eps_v * std::sinh(r) == doctest::Approx(e0).epsilon(1e-14));
  CHECK_THROWS_AS(derive_field_params(e0, 0.0, w), Error);
}

TEST_CASE("Fock-resolved ponderomotive energy at n = nbar") {
  for (double r : {0.5, 2.0, 5.3}) {
    const double e0 = 0.0534, w = 0.114;
    const FieldParams fp = derive_field_params(e0, r, w);
    const double nbar = std::sinh(r) * std::sinh(r);
    // eps^2 (2 nbar + 1) / 2w^2 = E0^2 / 4w^2 + eps^2 / 2w^2, the last term
    // being the half photon of vacuum fluctuation.
    const double up = fp.eps_v * fp.eps_v * (2.0 * nbar + 1.0) / (2.0 * w * w);
    const double classical = e0 * e0 / (4.0 * w * w);
    const double half = fp.eps_v * fp.eps_v / (2.0 * w * w);
    CHECK(std::abs(up - (classical + half)) <= 4e-16 * up);
    CHECK(up_shift(static_cast<int>(nbar), fp) == doctest::Approx(
        fp.eps_v * fp.eps_v * (2.0 * static_cast<int>(nbar) + 1.0) / (2.0 * w * w)).epsilon(1e-15));
  }
}

}  // TEST_SUITE
