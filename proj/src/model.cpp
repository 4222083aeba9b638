#include "qls/model.hpp"

#include <string>

namespace qls {

double wavelength_to_omega(double lambda_nm) {
  if (!(lambda_nm > 0.0))
    throw invalid_parameter("wavelength must be positive, got " +
                            std::to_string(lambda_nm));
  return 2.0 * std::numbers::pi * units::speed_of_light /
         (lambda_nm * units::bohr_per_nm);
}

double omega_to_wavelength(double omega) {
  if (!(omega > 0.0))
    throw invalid_parameter("angular frequency must be positive");
  return 2.0 * std::numbers::pi * units::speed_of_light /
         (omega * units::bohr_per_nm);
}

double intensity_to_field(double intensity_wcm2) {
  if (!(intensity_wcm2 >= 0.0))
    throw invalid_parameter("intensity must be non-negative");
  return std::sqrt(intensity_wcm2 / units::intensity_au);
}

SpaceGrid::SpaceGrid(double x_max, int nx) : x_max_(x_max), nx_(nx) {
  if (nx < 3 || nx % 2 == 0)
    throw invalid_parameter("grid point count must be odd and >= 3, got " +
                            std::to_string(nx));
  if (!(x_max > 0.0)) throw invalid_parameter("grid extent must be positive");
  dx_ = 2.0 * x_max / (nx - 1);
}

Eigen::VectorXd SpaceGrid::points() const {
  Eigen::VectorXd xs(nx_);
  for (int i = 0; i < nx_; ++i) xs[i] = x(i);
  return xs;
}

double atom_potential(double x, double softcore_a) {
  return -1.0 / std::sqrt(x * x + softcore_a);
}

AtomModel::AtomModel(SpaceGrid g, double a) : grid(g), softcore_a(a) {
  if (!(a > 0.0)) throw invalid_parameter("soft-core parameter must be > 0");
}

Eigen::VectorXd AtomModel::potential() const {
  Eigen::VectorXd v(grid.size());
  for (int i = 0; i < grid.size(); ++i)
    v[i] = atom_potential(grid.x(i), softcore_a);
  return v;
}

FockBand::FockBand(int lo, int hi) : n_min(lo), n_max(hi) {
  if (lo < 0 || hi < lo)
    throw invalid_parameter("Fock band requires 0 <= n_min <= n_max, got [" +
                            std::to_string(lo) + ", " + std::to_string(hi) +
                            "]");
}

FieldParams::FieldParams(double w, double e) : omega(w), eps_v(e) {
  if (!(w > 0.0) || !(e > 0.0))
    throw invalid_parameter("omega and eps_v must be positive");
}

FieldParams derive_field_params(double e0, double r, double omega) {
  if (r == 0.0)
    throw Error(ErrorKind::InvalidParameter, "degenerate-squeezing",
                "squeezing r = 0 has no field; use a coherent drive instead");
  if (!(r > 0.0) || !(e0 > 0.0) || !(omega > 0.0))
    throw invalid_parameter("derive_field_params needs r, E0, omega > 0");
  return FieldParams(omega, e0 / (2.0 * std::sinh(r)));
}

PulseEnvelope::PulseEnvelope(double ramp_up_cycles, double flat_cycles,
                             double ramp_down_cycles, double omega)
    : up_(ramp_up_cycles), flat_(flat_cycles), down_(ramp_down_cycles) {
  if (up_ < 0 || flat_ < 0 || down_ < 0)
    throw invalid_parameter("pulse cycle counts must be non-negative");
  if (!(omega > 0.0)) throw invalid_parameter("omega must be positive");
  period_ = 2.0 * std::numbers::pi / omega;
  total_ = (up_ + flat_ + down_) * period_;
  // A pulse that never rises (no ramp-up, no flat top) has no duration at
  // full strength.
  if (!(up_ + flat_ > 0.0))
    throw Error(ErrorKind::Config, "zero-duration",
                "pulse has zero duration: ramp_up_cycles + flat_cycles must be > 0");
}

double PulseEnvelope::operator()(double t) const {
  if (t <= 0.0 || t >= total_) return 0.0;
  const double t_up = up_ * period_;
  const double t_flat_end = (up_ + flat_) * period_;
  if (t < t_up) return t / t_up;
  if (t <= t_flat_end) return 1.0;
  return (total_ - t) / (down_ * period_);
}

}  // namespace qls
