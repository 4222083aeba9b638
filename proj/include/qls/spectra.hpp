#pragma once

// Energy-resolved observables. Photoelectron spectra use the window
// operator W = gamma^{2m} / ((H_A - E)^{2m} + gamma^{2m}), evaluated with
// complex tridiagonal solves instead of diagonalization.

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "qls/model.hpp"
#include "qls/propagators.hpp"

namespace qls {

// Uniform bin centres with window half-width gamma. The default
// gamma = 2 dE oversamples the windows so that the summed, bin-normalized
// windows are flat to ~1e-4 (the ripple of a gamma = dE/2 tiling is ~4%).
class EnergyGrid {
 public:
  EnergyGrid(double e_min, double e_max, int n_bins, double gamma = 0.0, int window_order = 2);

  double e_min() const { return e_min_; }
  double e_max() const { return e_max_; }
  int size() const { return n_bins_; }
  double gamma() const { return gamma_; }
  int window_order() const { return order_; }
  double spacing() const { return n_bins_ > 1 ? (e_max_ - e_min_) / (n_bins_ - 1) : 0.0; }
  double energy(int k) const { return e_min_ + k * spacing(); }
  Eigen::VectorXd energies() const;
  // dE / integral of the window profile: turns <W_k> into a bin probability.
  double bin_weight() const;

 private:
  double e_min_, e_max_;
  int n_bins_;
  double gamma_;
  int order_;
};

// Integral over E of gamma^{2m}/((E)^{2m} + gamma^{2m}) divided by gamma.
double window_area(int m);

// Applies W_k through one (m = 1) or two nested (m = 2) complex tridiagonal
// solves per energy.
class WindowOperator {
 public:
  explicit WindowOperator(const AtomModel& atom);
  // Raw <psi|W(E)|psi> with the dx metric.
  double expectation(const Eigen::VectorXcd& psi, double energy, double gamma, int m) const;

 private:
  Eigen::VectorXd diag_;
  double off_;
  double dx_;
};

double window_probability(const ElectronState& psi, const AtomModel& atom, double energy,
                          double gamma, int m = 2);

// Removes the overlap with the lowest bound states.
class BoundProjector {
 public:
  BoundProjector() = default;
  BoundProjector(const AtomModel& atom, int count);
  void apply(Eigen::VectorXcd& psi) const;
  int size() const { return static_cast<int>(states_.size()); }
  const std::vector<EigenPair>& states() const { return states_; }

 private:
  std::vector<EigenPair> states_;
  double dx_ = 1.0;
};

// Everything needed to turn many electron states into spectra on one grid.
class SpectrumEngine {
 public:
  SpectrumEngine(const AtomModel& atom, const EnergyGrid& egrid, int project_bound);
  Eigen::VectorXd pes(Eigen::VectorXcd psi) const;  // bin probabilities
  const EnergyGrid& grid() const { return egrid_; }
  const BoundProjector& projector() const { return projector_; }

 private:
  EnergyGrid egrid_;
  WindowOperator window_;
  BoundProjector projector_;
};

Eigen::VectorXd pes(const ElectronState& psi, const AtomModel& atom, const EnergyGrid& egrid,
                    int project_bound = 8);

// P(E, n): rows are energy bins, columns the Fock band.
Eigen::MatrixXd joint_spectrum(const JointState& state, const AtomModel& atom,
                               const EnergyGrid& egrid, int project_bound = 8, int threads = 0);

// P(n) = sum_x |c(x, n)|^2 dx.
Eigen::VectorXd photon_distribution(const JointState& state);

// U_p^{(n)} = eps_v^2 (2n + 1) / (2 omega^2).
double up_shift(int n, const FieldParams& fp);

struct CutoffLines {
  Eigen::VectorXi n;
  Eigen::VectorXd direct;      // 2 U_p^{(n)}
  Eigen::VectorXd rescatter;   // 10 U_p^{(n)}
};
CutoffLines cutoff_lines(const FieldParams& fp, const FockBand& band);

struct SpectralResult {
  Eigen::VectorXd energies;
  Eigen::VectorXd pes;
  Eigen::MatrixXd joint;        // optional (empty when absent)
  Eigen::VectorXd photon_dist;  // optional
  FockBand band;
  std::string method;           // fullq | qrep | rrep
  std::map<std::string, std::string> metadata;
};

// ---------------------------------------------------------------------------
// Analysis helpers for joint spectra.

// Mean of |P(E,n+1) - P(E,n)| / (P(E,n+1) + P(E,n)) over columns
// [col_lo, col_hi), skipping pairs whose sum is below `floor`.
double modulation_depth(const Eigen::MatrixXd& joint, int bin, int col_lo, int col_hi,
                        double floor = 0.0);

// Two-column boxcar: column k becomes the mean of columns k and k+1.
Eigen::MatrixXd pair_average(const Eigen::MatrixXd& joint);

// Normalized L1 distance sum|a-b| / max(sum|a|, sum|b|).
double normalized_l1(const Eigen::Ref<const Eigen::ArrayXd>& a,
                     const Eigen::Ref<const Eigen::ArrayXd>& b);

struct RidgeFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<int> n;
  std::vector<double> energy;
};

// Follows one ATI peak across columns [n_lo, n_hi] (band indices are
// photon numbers) starting near `e_start`, refining each maximum with a
// parabola, and fits E_peak(n) by least squares.
RidgeFit track_ridge(const Eigen::MatrixXd& joint, const EnergyGrid& egrid, const FockBand& band,
                     int n_lo, int n_hi, double e_start, double search_half_width, int stride = 1);

// Fraction of the joint-spectrum mass lying above E = factor * U_p^{(n)}.
double mass_fraction_above(const Eigen::MatrixXd& joint, const EnergyGrid& egrid,
                           const FockBand& band, const FieldParams& fp, double factor);

}  // namespace qls
