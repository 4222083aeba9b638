#include "qls/propagators.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "qls/error.hpp"
#include "qls/parallel.hpp"

namespace qls {

namespace {
constexpr cplx I{0.0, 1.0};
}

ElectronState ElectronState::mirrored() const {
  return {grid, psi.reverse()};
}

Schedule Schedule::covering(const PulseEnvelope& env, double dt_target, int record_every) {
  if (!(dt_target > 0.0)) throw invalid_parameter("time step must be positive");
  const int n = std::max(1, static_cast<int>(std::ceil(env.duration() / dt_target - 1e-9)));
  return {env.duration() / n, n, record_every, 0.0};
}

Schedule Schedule::reversed() const { return {-dt, n_steps, record_every, t_end()}; }

SymTridiagonal atomic_hamiltonian(const AtomModel& atom) {
  const auto& g = atom.grid;
  const double inv = 1.0 / (g.dx() * g.dx());
  SymTridiagonal h;
  h.diag = atom.potential().array() + inv;
  h.off = Eigen::VectorXd::Constant(g.size() - 1, -0.5 * inv);
  return h;
}

GroundState ground_state(const AtomModel& atom) {
  const auto pairs = lowest_eigenpairs(atomic_hamiltonian(atom), 1, 1e-12, 200);
  Eigen::VectorXd v = pairs[0].vector / std::sqrt(atom.grid.dx());
  if (v[(atom.grid.size() - 1) / 2] < 0) v = -v;
  return {{atom.grid, v.cast<cplx>()}, pairs[0].value};
}

std::vector<EigenPair> bound_states(const AtomModel& atom, int count) {
  std::vector<EigenPair> out;
  if (count <= 0) return out;
  const auto h = atomic_hamiltonian(atom);
  const int available = std::min(count, h.count_below(0.0));
  for (auto& p : lowest_eigenpairs(h, available, 1e-12, 200)) {
    p.vector /= std::sqrt(atom.grid.dx());
    out.push_back(std::move(p));
  }
  return out;
}

double classical_field(double t, cplx alpha, const FieldParams& fp, const PulseEnvelope& env) {
  return 2.0 * std::abs(alpha) * fp.eps_v * std::sin(fp.omega * t - std::arg(alpha)) * env(t);
}

Eigen::VectorXd boundary_mask(const SpaceGrid& grid, double fraction) {
  Eigen::VectorXd m = Eigen::VectorXd::Ones(grid.size());
  const double x_b = (1.0 - fraction) * grid.x_max();
  for (int i = 0; i < grid.size(); ++i) {
    const double ax = std::abs(grid.x(i));
    if (ax > x_b) {
      const double s = std::cos(0.5 * std::numbers::pi * (ax - x_b) / (grid.x_max() - x_b));
      m[i] = std::pow(std::max(s, 0.0), 0.125);
    }
  }
  return m;
}

namespace {

double boundary_mass(const Eigen::VectorXcd& psi, const SpaceGrid& grid) {
  const int edge = std::max(1, grid.size() / 20);
  double m = 0.0;
  for (int i = 0; i < edge; ++i)
    m += std::norm(psi[i]) + std::norm(psi[grid.size() - 1 - i]);
  return m * grid.dx();
}

}  // namespace

ClassicalPropagator::ClassicalPropagator(const AtomModel& atom, const FieldParams& fp,
                                         const PulseEnvelope& env, ClassicalOptions opts)
    : grid_(atom.grid), fp_(fp), env_(env), opts_(opts) {
  const auto h = atomic_hamiltonian(atom);
  diag_ = h.diag;
  off_ = h.off.size() > 0 ? h.off[0] : 0.0;
  x_ = grid_.points();
  if (opts_.mask) mask_ = boundary_mask(grid_);
  work_.resize(grid_.size());
  d_.resize(grid_.size());
}

void ClassicalPropagator::step(Eigen::VectorXcd& psi, double field_mid, double dt) const {
  const int n = grid_.size();
  const cplx k = 0.5 * I * dt;  // (1 + k H) psi' = (1 - k H) psi
  const cplx ko = k * off_;
  cplx prev = 0.0;
  for (int i = 0; i < n; ++i) {
    const double hd = diag_[i] + x_[i] * field_mid;
    d_[i] = 1.0 + k * hd;
    const cplx cur = psi[i];
    const cplx next = i + 1 < n ? psi[i + 1] : cplx{};
    psi[i] = (1.0 - k * hd) * cur - ko * (prev + next);
    prev = cur;
  }
  // Thomas with constant off-diagonal ko.
  cplx denom = d_[0];
  psi[0] /= denom;
  for (int i = 1; i < n; ++i) {
    work_[i - 1] = ko / denom;
    denom = d_[i] - ko * work_[i - 1];
    psi[i] = (psi[i] - ko * psi[i - 1]) / denom;
  }
  for (int i = n - 1; i-- > 0;) psi[i] -= work_[i] * psi[i + 1];
  if (opts_.mask) psi.array() *= mask_.array().cast<cplx>();
}

ElectronState ClassicalPropagator::propagate(const ElectronState& psi0, cplx alpha,
                                             const Schedule& sched, Diagnostics* diag) const {
  if (!(psi0.grid == grid_)) throw invalid_parameter("state grid does not match propagator grid");
  Eigen::VectorXcd psi = psi0.psi;
  const double n0 = psi0.norm();
  double max_boundary = 0.0;
  for (int s = 0; s < sched.n_steps; ++s) {
    const double t = sched.t_start + s * sched.dt;
    step(psi, classical_field(t + 0.5 * sched.dt, alpha, fp_, env_), sched.dt);
    const bool last = s + 1 == sched.n_steps;
    if (diag && (last || (sched.record_every > 0 && (s + 1) % sched.record_every == 0))) {
      StepRecord r;
      r.step = s + 1;
      r.time = t + sched.dt;
      r.norm = psi.squaredNorm() * grid_.dx();
      r.boundary_occupation = boundary_mass(psi, grid_);
      max_boundary = std::max(max_boundary, r.boundary_occupation);
      diag->max_norm_drift = std::max(diag->max_norm_drift, std::abs(r.norm - n0));
      diag->records.push_back(r);
    }
  }
  if (!std::isfinite(psi.squaredNorm()))
    throw numerical_error("numerical-blowup", "classical propagation produced NaN/Inf");
  if (diag && max_boundary > opts_.escape_threshold) {
    std::ostringstream msg;
    msg << "wavepacket-escape: boundary occupation " << max_boundary << " exceeds "
        << opts_.escape_threshold << " (alpha = " << alpha << ")";
    diag->warnings.push_back(msg.str());
  }
  return {grid_, std::move(psi)};
}

ElectronState propagate_classical(const ElectronState& psi0, const AtomModel& atom, cplx alpha,
                                  const FieldParams& fp, const PulseEnvelope& env,
                                  const Schedule& sched, Diagnostics* diag,
                                  ClassicalOptions opts) {
  return ClassicalPropagator(atom, fp, env, opts).propagate(psi0, alpha, sched, diag);
}

JointState init_joint_state(const ElectronState& psi_g, const PhotonAmplitudes& photon) {
  JointState s{psi_g.grid, photon.band, psi_g.psi * photon.coeffs.transpose(), 0.0};
  return s;
}

double edge_occupation(const JointState& s) {
  const double dx = s.grid.dx();
  double e = s.c.col(s.band.count() - 1).squaredNorm() * dx;
  if (s.band.n_min > 0 && s.band.count() > 1) e += s.c.col(0).squaredNorm() * dx;
  return e;
}

ParityMasses parity_sectors(const JointState& s) {
  ParityMasses pm;
  const int nx = s.grid.size();
  for (int k = 0; k < s.band.count(); ++k) {
    const double sign = (s.band.n_min + k) % 2 == 0 ? 1.0 : -1.0;
    const auto col = s.c.col(k);
    for (int i = 0; i < nx; ++i) {
      const cplx a = col[i], b = sign * col[nx - 1 - i];
      pm.even += 0.25 * std::norm(a + b);
      pm.odd += 0.25 * std::norm(a - b);
    }
  }
  pm.even *= s.grid.dx();
  pm.odd *= s.grid.dx();
  return pm;
}

// ---------------------------------------------------------------------------

FullqStepper::FullqStepper(const AtomModel& atom, const FockBand& band, const FieldParams& fp,
                           const PulseEnvelope& env, double dt, int threads, bool mask)
    : grid_(atom.grid),
      band_(band),
      fp_(fp),
      env_(env),
      dt_(dt),
      threads_(threads > 0 ? threads : default_threads()),
      mask_on_(mask) {
  const auto h = atomic_hamiltonian(atom);
  const int nx = grid_.size();
  const double off = h.off.size() > 0 ? h.off[0] : 0.0;
  const cplx k = 0.25 * I * dt;  // half step: (1 + i (dt/2)/2 H_A)
  std::vector<cplx> sub(nx, k * off), diag(nx), sup(nx, k * off);
  rhs_diag_.resize(nx);
  for (int i = 0; i < nx; ++i) {
    diag[i] = 1.0 + k * h.diag[i];
    rhs_diag_[i] = 1.0 - k * h.diag[i];
  }
  rhs_off_ = -k * off;
  lu_ = TridiagonalLU<cplx>(sub, diag, sup);
  x_ = grid_.points();
  if (mask_on_) mask_ = boundary_mask(grid_);
  upper_.resize(nx, band_.count());
}

void FullqStepper::atomic_half(Eigen::MatrixXcd& c) const {
  const int nx = grid_.size();
  parallel_for(static_cast<std::size_t>(c.cols()), threads_, [&](std::size_t col) {
    cplx* p = c.col(static_cast<Eigen::Index>(col)).data();
    cplx prev = 0.0;
    for (int i = 0; i < nx; ++i) {
      const cplx cur = p[i];
      const cplx next = i + 1 < nx ? p[i + 1] : cplx{};
      p[i] = rhs_diag_[i] * cur + rhs_off_ * (prev + next);
      prev = cur;
    }
    lu_.solve_in_place(std::span<cplx>(p, nx));
  });
}

void FullqStepper::interaction(Eigen::MatrixXcd& c, double t_mid) const {
  const int nx = grid_.size();
  const int nb = band_.count();
  const double f = env_(t_mid);
  if (f == 0.0 || nb < 2) return;
  // M(n, n+1) = x beta_n with beta_n = i f eps_v sqrt(n+1) e^{-i w t}.
  std::vector<cplx> beta(nb - 1);
  const cplx phase = std::polar(1.0, -fp_.omega * t_mid);
  for (int j = 0; j + 1 < nb; ++j)
    beta[j] = I * f * fp_.eps_v * std::sqrt(double(band_.n_min + j + 1)) * phase;
  const cplx h = 0.5 * I * dt_;  // (1 + h M) c' = (1 - h M) c

  const std::size_t chunks = static_cast<std::size_t>(std::min(threads_, nx));
  parallel_for(chunks, threads_, [&](std::size_t w) {
    const int lo = static_cast<int>(nx * w / chunks), hi = static_cast<int>(nx * (w + 1) / chunks);
    const int len = hi - lo;
    std::vector<cplx> prev_old(len, cplx{}), kx(len);
    for (int i = 0; i < len; ++i) kx[i] = h * x_[lo + i];
    // Forward elimination level by level; column j-1 already holds the
    // eliminated values while column j+1 still holds the old amplitudes.
    for (int j = 0; j < nb; ++j) {
      cplx* cj = c.col(j).data() + lo;
      const cplx* cn = j + 1 < nb ? c.col(j + 1).data() + lo : nullptr;
      const cplx* zprev = j > 0 ? c.col(j - 1).data() + lo : nullptr;
      cplx* wj = upper_.col(j).data() + lo;
      const cplx* wprev = j > 0 ? upper_.col(j - 1).data() + lo : nullptr;
      const cplx bj = j + 1 < nb ? beta[j] : cplx{};
      const cplx bprev = j > 0 ? std::conj(beta[j - 1]) : cplx{};
      for (int i = 0; i < len; ++i) {
        const cplx cur = cj[i];
        const cplx next = cn ? cn[i] : cplx{};
        cplx y = cur - kx[i] * (bj * next + bprev * prev_old[i]);
        prev_old[i] = cur;
        cplx denom = 1.0;
        if (j > 0) {
          const cplx sub = kx[i] * bprev;
          denom -= sub * wprev[i];
          y -= sub * zprev[i];
        }
        wj[i] = kx[i] * bj / denom;
        cj[i] = y / denom;
      }
    }
    for (int j = nb - 2; j >= 0; --j) {
      cplx* cj = c.col(j).data() + lo;
      const cplx* cn = c.col(j + 1).data() + lo;
      const cplx* wj = upper_.col(j).data() + lo;
      for (int i = 0; i < len; ++i) cj[i] -= wj[i] * cn[i];
    }
  });
}

void FullqStepper::step(Eigen::MatrixXcd& c, double t) const {
  atomic_half(c);
  interaction(c, t + 0.5 * dt_);
  atomic_half(c);
  if (mask_on_) c.array().colwise() *= mask_.array().cast<cplx>();
}

JointState propagate_fullq(JointState state, const AtomModel& atom, const FieldParams& fp,
                           const PulseEnvelope& env, const Schedule& sched, Diagnostics* diag,
                           FullqOptions opts) {
  if (!(state.grid == atom.grid)) throw invalid_parameter("joint state grid does not match atom grid");
  FullqStepper stepper(atom, state.band, fp, env, sched.dt, opts.threads, opts.mask);
  const double n0 = state.norm();
  const ParityMasses p0 = parity_sectors(state);
  // Track the sector that starts (nearly) empty.
  const bool track_odd = p0.odd <= p0.even;
  const bool definite = std::min(p0.even, p0.odd) <= 1e-14 * std::max(n0, 1e-300);

  auto check = [&](int step, double t) {
    StepRecord r;
    r.step = step;
    r.time = t;
    r.norm = state.norm();
    if (!std::isfinite(r.norm)) {
      std::ostringstream msg;
      msg << "joint propagation produced NaN/Inf at step " << step;
      throw numerical_error("numerical-blowup", msg.str());
    }
    r.edge_occupation = edge_occupation(state);
    if (definite) {
      const ParityMasses pm = parity_sectors(state);
      r.parity_leakage = track_odd ? pm.odd : pm.even;
    }
    if (r.edge_occupation > opts.edge_threshold) {
      const int width = state.band.count();
      std::ostringstream msg;
      msg << "band-overflow: Fock-edge occupation " << r.edge_occupation << " > "
          << opts.edge_threshold << " at step " << step << "; widen the band to n_max >= "
          << state.band.n_max + std::max(10, width / 4);
      if (state.band.n_min > 0) msg << " and n_min <= " << std::max(0, state.band.n_min - std::max(10, width / 4));
      if (opts.throw_on_edge) throw Error(ErrorKind::Numerical, "band-overflow", msg.str());
      if (diag) diag->warnings.push_back(msg.str());
    }
    if (diag) {
      diag->max_edge_occupation = std::max(diag->max_edge_occupation, r.edge_occupation);
      diag->max_parity_leakage = std::max(diag->max_parity_leakage, r.parity_leakage);
      diag->max_norm_drift = std::max(diag->max_norm_drift, std::abs(r.norm - n0));
      diag->records.push_back(r);
    }
  };

  check(0, sched.t_start);
  for (int s = 0; s < sched.n_steps; ++s) {
    const double t = sched.t_start + s * sched.dt;
    stepper.step(state.c, t);
    state.time = t + sched.dt;
    const bool last = s + 1 == sched.n_steps;
    if (last || (sched.record_every > 0 && (s + 1) % sched.record_every == 0)) check(s + 1, state.time);
  }
  return state;
}

}  // namespace qls
