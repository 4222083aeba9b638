#pragma once

// Domain parameters shared by every solver: unit conversions, the spatial
// grid, the Fock band, field parameters, the pulse envelope and the
// soft-core atom. Everything is in atomic units past the config boundary.

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "qls/error.hpp"

namespace qls {

namespace units {
inline constexpr double speed_of_light = 137.035999;      // a.u.
inline constexpr double bohr_per_nm = 18.897261;          // 1 nm in a.u.
inline constexpr double intensity_au = 3.50945e16;        // W/cm^2
}  // namespace units

double wavelength_to_omega(double lambda_nm);
double omega_to_wavelength(double omega);
double intensity_to_field(double intensity_wcm2);

class SpaceGrid {
 public:
  SpaceGrid(double x_max, int nx);

  double x_max() const { return x_max_; }
  int size() const { return nx_; }
  double dx() const { return dx_; }
  // Computed from the centre index so that x(i) == -x(nx-1-i) bitwise.
  double x(int i) const { return (i - (nx_ - 1) / 2) * dx_; }
  int mirror(int i) const { return nx_ - 1 - i; }
  Eigen::VectorXd points() const;

  bool operator==(const SpaceGrid&) const = default;

 private:
  double x_max_;
  int nx_;
  double dx_;
};

double atom_potential(double x, double softcore_a);

struct AtomModel {
  SpaceGrid grid;
  double softcore_a = 2.0;

  AtomModel(SpaceGrid g, double a = 2.0);
  Eigen::VectorXd potential() const;
};

struct FockBand {
  int n_min = 0;
  int n_max = 0;

  FockBand() = default;
  FockBand(int lo, int hi);
  int count() const { return n_max - n_min + 1; }
  bool contains(int n) const { return n >= n_min && n <= n_max; }
  bool operator==(const FockBand&) const = default;
};

struct FieldParams {
  double omega = 0.0;
  double eps_v = 0.0;

  FieldParams() = default;
  FieldParams(double w, double e);
  double quantization_volume() const {
    return 2.0 * std::numbers::pi * omega / (eps_v * eps_v);
  }
  double cycle_period() const { return 2.0 * std::numbers::pi / omega; }
};

// eps_v = E0 / (2 sinh r); r == 0 is a degenerate squeeze.
FieldParams derive_field_params(double e0, double r, double omega);

class PulseEnvelope {
 public:
  PulseEnvelope(double ramp_up_cycles, double flat_cycles,
                double ramp_down_cycles, double omega);

  double duration() const { return total_; }
  double cycle_period() const { return period_; }
  double ramp_up_cycles() const { return up_; }
  double flat_cycles() const { return flat_; }
  double ramp_down_cycles() const { return down_; }
  double operator()(double t) const;

 private:
  double up_, flat_, down_;
  double period_;
  double total_;
};

inline double envelope(double t, const PulseEnvelope& env) { return env(t); }

struct DriveSpec {
  double intensity_wcm2 = 0.0;
  double wavelength_nm = 0.0;
  double squeezing_r = 0.0;
  double squeezing_phase = 0.0;

  double omega() const { return wavelength_to_omega(wavelength_nm); }
  double e0() const { return intensity_to_field(intensity_wcm2); }
  double n_bar() const {
    double s = std::sinh(squeezing_r);
    return s * s;
  }
  FieldParams field_params() const {
    return derive_field_params(e0(), squeezing_r, omega());
  }
};

}  // namespace qls
