#pragma once

// Crank-Nicolson (Cayley) propagation: field-free ground state, the
// classical-field electron propagator used per alpha node, and the joint
// electron-photon propagator on the grid x Fock-band product space.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "qls/model.hpp"
#include "qls/photon.hpp"
#include "qls/tridiagonal.hpp"

namespace qls {

struct ElectronState {
  SpaceGrid grid;
  Eigen::VectorXcd psi;

  double norm() const { return psi.squaredNorm() * grid.dx(); }
  // psi(x) -> psi(-x).
  ElectronState mirrored() const;
};

// Amplitudes c(x, n) stored column-per-Fock-level (nx x band.count()).
struct JointState {
  SpaceGrid grid;
  FockBand band;
  Eigen::MatrixXcd c;
  double time = 0.0;

  double norm() const { return c.squaredNorm() * grid.dx(); }
  Eigen::VectorXcd column(int n) const { return c.col(n - band.n_min); }
};

struct Schedule {
  double dt = 0.0;
  int n_steps = 0;
  int record_every = 0;  // 0: record the final step only
  double t_start = 0.0;

  double t_end() const { return t_start + n_steps * dt; }
  // Uniform steps covering the pulse with dt <= dt_target.
  static Schedule covering(const PulseEnvelope& env, double dt_target,
                           int record_every = 0);
  // Same steps traversed from the end back to the start.
  Schedule reversed() const;
};

struct StepRecord {
  int step = 0;
  double time = 0.0;
  double norm = 0.0;
  double edge_occupation = 0.0;
  double parity_leakage = 0.0;
  double boundary_occupation = 0.0;
};

struct Diagnostics {
  std::vector<StepRecord> records;
  std::vector<std::string> warnings;
  double max_edge_occupation = 0.0;
  double max_parity_leakage = 0.0;
  double max_norm_drift = 0.0;
};

// H_A = -1/2 d^2/dx^2 + V(x), 3-point Laplacian, Dirichlet walls.
SymTridiagonal atomic_hamiltonian(const AtomModel& atom);

struct GroundState {
  ElectronState state;
  double energy;
};

// Lowest eigenpair by bisection + shifted inverse iteration; psi is real,
// normalized with the dx metric and positive at x = 0.
GroundState ground_state(const AtomModel& atom);

// Lowest `count` eigenstates with negative energy, dx-normalized.
std::vector<EigenPair> bound_states(const AtomModel& atom, int count);

// E(t) = 2 |alpha| eps_v sin(omega t - arg alpha) f(t).
double classical_field(double t, cplx alpha, const FieldParams& fp,
                       const PulseEnvelope& env);

// cos^(1/8) boundary mask over the outer `fraction` of the box.
Eigen::VectorXd boundary_mask(const SpaceGrid& grid, double fraction = 0.15);

struct ClassicalOptions {
  bool mask = false;
  double escape_threshold = 1e-6;  // mass in the outer 10% of the box
};

// Reusable workspace for repeated classical propagations on one grid.
class ClassicalPropagator {
 public:
  ClassicalPropagator(const AtomModel& atom, const FieldParams& fp,
                      const PulseEnvelope& env, ClassicalOptions opts = {});

  ElectronState propagate(const ElectronState& psi0, cplx alpha,
                          const Schedule& sched,
                          Diagnostics* diag = nullptr) const;
  void step(Eigen::VectorXcd& psi, double field_mid, double dt) const;

 private:
  SpaceGrid grid_;
  FieldParams fp_;
  PulseEnvelope env_;
  ClassicalOptions opts_;
  Eigen::VectorXd diag_;   // H_A diagonal
  Eigen::VectorXd x_;
  Eigen::VectorXd mask_;
  double off_;             // H_A off-diagonal
  mutable std::vector<cplx> work_, d_;
};

ElectronState propagate_classical(const ElectronState& psi0, const AtomModel& atom,
                                  cplx alpha, const FieldParams& fp,
                                  const PulseEnvelope& env, const Schedule& sched,
                                  Diagnostics* diag = nullptr,
                                  ClassicalOptions opts = {});

// c(x, n) = psi_g(x) s_n.
JointState init_joint_state(const ElectronState& psi_g, const PhotonAmplitudes& photon);

// Fock-edge occupation: mass in the n_max column, plus the n_min column
// when n_min > 0 (n = 0 is a physical boundary, not a truncation).
double edge_occupation(const JointState& s);

// Masses of the combined-parity sectors Pi = (x-parity)(-1)^n.
struct ParityMasses {
  double even = 0.0;
  double odd = 0.0;
};
ParityMasses parity_sectors(const JointState& s);

struct FullqOptions {
  double edge_threshold = 1e-8;
  bool throw_on_edge = true;
  bool mask = false;
  int threads = 0;  // 0: default_threads()
};

// One Strang step exp(-iH_A dt/2) exp(-iH_int(t+dt/2) dt) exp(-iH_A dt/2),
// each factor in Cayley form. Batched over Fock columns (atomic factor) and
// grid rows (interaction factor).
class FullqStepper {
 public:
  FullqStepper(const AtomModel& atom, const FockBand& band, const FieldParams& fp,
               const PulseEnvelope& env, double dt, int threads = 0, bool mask = false);

  void step(Eigen::MatrixXcd& c, double t) const;
  double dt() const { return dt_; }

 private:
  void atomic_half(Eigen::MatrixXcd& c) const;
  void interaction(Eigen::MatrixXcd& c, double t_mid) const;

  SpaceGrid grid_;
  FockBand band_;
  FieldParams fp_;
  PulseEnvelope env_;
  double dt_;
  int threads_;
  bool mask_on_;
  Eigen::VectorXd mask_;
  Eigen::VectorXd x_;
  Eigen::VectorXcd rhs_diag_;  // 1 - i dt/4 d_i
  cplx rhs_off_;               // -i dt/4 o
  TridiagonalLU<cplx> lu_;
  mutable Eigen::MatrixXcd upper_;  // Thomas scratch for the n-sweep
};

JointState propagate_fullq(JointState state, const AtomModel& atom, const FieldParams& fp,
                           const PulseEnvelope& env, const Schedule& sched,
                           Diagnostics* diag = nullptr, FullqOptions opts = {});

}  // namespace qls
