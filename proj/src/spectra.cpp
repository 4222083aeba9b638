#include "qls/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qls/error.hpp"
#include "qls/parallel.hpp"

namespace qls {

EnergyGrid::EnergyGrid(double e_min, double e_max, int n_bins, double gamma, int window_order)
    : e_min_(e_min), e_max_(e_max), n_bins_(n_bins), gamma_(gamma), order_(window_order) {
  if (n_bins < 1) throw invalid_parameter("energy grid needs at least one bin");
  if (n_bins > 1 && !(e_max > e_min)) throw invalid_parameter("energy grid needs e_max > e_min");
  if (order_ != 1 && order_ != 2) throw invalid_parameter("window order must be 1 or 2");
  if (gamma_ <= 0.0) gamma_ = 2.0 * spacing();
  if (!(gamma_ > 0.0)) throw invalid_parameter("window half-width gamma must be > 0");
}

Eigen::VectorXd EnergyGrid::energies() const {
  Eigen::VectorXd e(n_bins_);
  for (int k = 0; k < n_bins_; ++k) e[k] = energy(k);
  return e;
}

double window_area(int m) {
  return std::numbers::pi / (m * std::sin(std::numbers::pi / (2.0 * m)));
}

double EnergyGrid::bin_weight() const {
  return n_bins_ > 1 ? spacing() / (gamma_ * window_area(order_)) : 1.0;
}

WindowOperator::WindowOperator(const AtomModel& atom) : dx_(atom.grid.dx()) {
  const auto h = atomic_hamiltonian(atom);
  diag_ = h.diag;
  off_ = h.off.size() > 0 ? h.off[0] : 0.0;
}

namespace {

// Solves (H - z) y = y in place; H has diagonal d and constant off-diagonal o.
void solve_shifted(const Eigen::VectorXd& d, double o, cplx z, Eigen::VectorXcd& y,
                   std::vector<cplx>& work) {
  const Eigen::Index n = y.size();
  cplx denom = d[0] - z;
  y[0] /= denom;
  for (Eigen::Index i = 1; i < n; ++i) {
    work[i - 1] = o / denom;
    denom = d[i] - z - o * work[i - 1];
    y[i] = (y[i] - o * y[i - 1]) / denom;
  }
  for (Eigen::Index i = n - 1; i-- > 0;) y[i] -= work[i] * y[i + 1];
}

}  // namespace

double WindowOperator::expectation(const Eigen::VectorXcd& psi, double energy, double gamma,
                                   int m) const {
  if (!(gamma > 0.0)) throw invalid_parameter("window half-width gamma must be > 0");
  if (m != 1 && m != 2) throw invalid_parameter("window order must be 1 or 2");
  if (psi.size() != diag_.size()) throw invalid_parameter("state size does not match grid");
  std::vector<cplx> work(psi.size());
  Eigen::VectorXcd y = psi;
  if (m == 1) {
    solve_shifted(diag_, off_, cplx(energy, gamma), y, work);
    return gamma * gamma * y.squaredNorm() * dx_;
  }
  // (H-E)^2 + i g^2 = (H - E + a)(H - E - a), a = g e^{-i pi/4}.
  const cplx a = std::polar(gamma, -0.25 * std::numbers::pi);
  solve_shifted(diag_, off_, energy - a, y, work);
  solve_shifted(diag_, off_, energy + a, y, work);
  const double g2 = gamma * gamma;
  return g2 * g2 * y.squaredNorm() * dx_;
}

double window_probability(const ElectronState& psi, const AtomModel& atom, double energy,
                          double gamma, int m) {
  return WindowOperator(atom).expectation(psi.psi, energy, gamma, m);
}

BoundProjector::BoundProjector(const AtomModel& atom, int count)
    : states_(bound_states(atom, count)), dx_(atom.grid.dx()) {}

void BoundProjector::apply(Eigen::VectorXcd& psi) const {
  for (const auto& b : states_) {
    const cplx overlap = b.vector.cast<cplx>().dot(psi) * dx_;
    psi -= overlap * b.vector.cast<cplx>();
  }
}

SpectrumEngine::SpectrumEngine(const AtomModel& atom, const EnergyGrid& egrid, int project_bound)
    : egrid_(egrid), window_(atom), projector_(atom, project_bound) {
  if (project_bound > 0 && egrid.e_min() < 0.0)
    throw invalid_parameter("bound-state projection requires e_min >= 0");
}

Eigen::VectorXd SpectrumEngine::pes(Eigen::VectorXcd psi) const {
  projector_.apply(psi);
  Eigen::VectorXd out(egrid_.size());
  const double w = egrid_.bin_weight();
  for (int k = 0; k < egrid_.size(); ++k)
    out[k] = w * window_.expectation(psi, egrid_.energy(k), egrid_.gamma(), egrid_.window_order());
  return out;
}

Eigen::VectorXd pes(const ElectronState& psi, const AtomModel& atom, const EnergyGrid& egrid,
                    int project_bound) {
  return SpectrumEngine(atom, egrid, project_bound).pes(psi.psi);
}

Eigen::MatrixXd joint_spectrum(const JointState& state, const AtomModel& atom,
                               const EnergyGrid& egrid, int project_bound, int threads) {
  const SpectrumEngine engine(atom, egrid, project_bound);
  Eigen::MatrixXd out(egrid.size(), state.band.count());
  parallel_for(static_cast<std::size_t>(state.band.count()), threads > 0 ? threads : default_threads(),
               [&](std::size_t k) {
                 const auto col = static_cast<Eigen::Index>(k);
                 out.col(col) = engine.pes(state.c.col(col));
               });
  return out;
}

Eigen::VectorXd photon_distribution(const JointState& state) {
  return state.c.colwise().squaredNorm().transpose() * state.grid.dx();
}

double up_shift(int n, const FieldParams& fp) {
  if (n < 0) throw invalid_parameter("photon number must be >= 0");
  return fp.eps_v * fp.eps_v * (2.0 * n + 1.0) / (2.0 * fp.omega * fp.omega);
}

CutoffLines cutoff_lines(const FieldParams& fp, const FockBand& band) {
  CutoffLines c;
  c.n.resize(band.count());
  c.direct.resize(band.count());
  c.rescatter.resize(band.count());
  for (int k = 0; k < band.count(); ++k) {
    const int n = band.n_min + k;
    const double up = up_shift(n, fp);
    c.n[k] = n;
    c.direct[k] = 2.0 * up;
    c.rescatter[k] = 10.0 * up;
  }
  return c;
}

double modulation_depth(const Eigen::MatrixXd& joint, int bin, int col_lo, int col_hi,
                        double floor) {
  double sum = 0.0;
  int count = 0;
  const int last = std::min(col_hi, static_cast<int>(joint.cols()) - 1);
  for (int k = std::max(col_lo, 0); k < last; ++k) {
    const double a = joint(bin, k), b = joint(bin, k + 1);
    if (a + b <= floor || a + b <= 0.0) continue;
    sum += std::abs(b - a) / (a + b);
    ++count;
  }
  return count > 0 ? sum / count : 0.0;
}

Eigen::MatrixXd pair_average(const Eigen::MatrixXd& joint) {
  const Eigen::Index cols = joint.cols();
  if (cols < 2) return joint;
  Eigen::MatrixXd out(joint.rows(), cols - 1);
  for (Eigen::Index k = 0; k + 1 < cols; ++k) out.col(k) = 0.5 * (joint.col(k) + joint.col(k + 1));
  return out;
}

double normalized_l1(const Eigen::Ref<const Eigen::ArrayXd>& a,
                     const Eigen::Ref<const Eigen::ArrayXd>& b) {
  if (a.size() != b.size()) throw invalid_parameter("normalized_l1: size mismatch");
  const double denom = std::max(a.abs().sum(), b.abs().sum());
  return denom > 0.0 ? (a - b).abs().sum() / denom : 0.0;
}

RidgeFit track_ridge(const Eigen::MatrixXd& joint, const EnergyGrid& egrid, const FockBand& band,
                     int n_lo, int n_hi, double e_start, double search_half_width, int stride) {
  RidgeFit fit;
  const double de = egrid.spacing();
  double e_prev = e_start;
  for (int n = n_lo; n <= n_hi; n += std::max(1, stride)) {
    if (!band.contains(n)) continue;
    const auto col = joint.col(n - band.n_min);
    const int k_lo = std::max(1, static_cast<int>(std::floor((e_prev - search_half_width - egrid.e_min()) / de)));
    const int k_hi = std::min(egrid.size() - 2,
                              static_cast<int>(std::ceil((e_prev + search_half_width - egrid.e_min()) / de)));
    if (k_hi < k_lo) break;
    int best = k_lo;
    for (int k = k_lo; k <= k_hi; ++k)
      if (col[k] > col[best]) best = k;
    const double a = col[best - 1], b = col[best], c = col[best + 1];
    const double curv = a - 2.0 * b + c;
    const double offset = curv < 0.0 ? std::clamp(0.5 * (a - c) / curv, -0.5, 0.5) : 0.0;
    const double e = egrid.energy(best) + offset * de;
    fit.n.push_back(n);
    fit.energy.push_back(e);
    e_prev = e;
  }
  const std::size_t m = fit.n.size();
  if (m >= 2) {
    double sn = 0, se = 0, snn = 0, sne = 0;
    for (std::size_t i = 0; i < m; ++i) {
      sn += fit.n[i];
      se += fit.energy[i];
      snn += double(fit.n[i]) * fit.n[i];
      sne += fit.n[i] * fit.energy[i];
    }
    const double denom = m * snn - sn * sn;
    fit.slope = (m * sne - sn * se) / denom;
    fit.intercept = (se - fit.slope * sn) / m;
  }
  return fit;
}

double mass_fraction_above(const Eigen::MatrixXd& joint, const EnergyGrid& egrid,
                           const FockBand& band, const FieldParams& fp, double factor) {
  double total = 0.0, above = 0.0;
  for (int k = 0; k < band.count(); ++k) {
    const double line = factor * up_shift(band.n_min + k, fp);
    for (int b = 0; b < egrid.size(); ++b) {
      total += joint(b, k);
      if (egrid.energy(b) > line) above += joint(b, k);
    }
  }
  return total > 0.0 ? above / total : 0.0;
}

}  // namespace qls
