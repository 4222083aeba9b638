#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "qls/error.hpp"
#include "qls/propagators.hpp"
#include "support/oracles.hpp"

using namespace qls;

using namespace qls::oracle;
using qls::oracle::I;

TEST_SUITE("propagators") {

TEST_CASE("ground state matches dense diagonalization") {
  AtomModel atom(SpaceGrid(50.0, 201), 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_atomic(atom));
  const GroundState g = ground_state(atom);
  CHECK(std::abs(g.energy - es.eigenvalues()[0]) < 1e-10);
  Eigen::VectorXd ref = es.eigenvectors().col(0) / std::sqrt(atom.grid.dx());
  if (ref[100] < 0) ref = -ref;
  CHECK((g.state.psi.real() - ref).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(g.state.psi.imag().norm() == 0.0);
  CHECK(g.state.norm() == doctest::Approx(1.0).epsilon(1e-12));

  const auto bound = bound_states(atom, 4);
  REQUIRE(bound.size() == 4);
  for (int k = 0; k < 4; ++k) CHECK(std::abs(bound[k].value - es.eigenvalues()[k]) < 1e-10);
}

TEST_CASE("classical step matches the dense Cayley factor") {
  AtomModel atom(SpaceGrid(10.0, 21), 2.0);
  FieldParams fp(0.8, 0.1);
  PulseEnvelope env(1, 1, 1, fp.omega);
  ClassicalPropagator prop(atom, fp, env);
  const double dt = 0.1, e = 0.37;
  Eigen::MatrixXcd h = dense_atomic(atom).cast<cplx>();
  for (int i = 0; i < 21; ++i) h(i, i) += e * atom.grid.x(i);
  Eigen::VectorXcd psi = random_state(21, 1, 3).col(0);
  const Eigen::VectorXcd ref = cayley(h, dt) * psi;
  prop.step(psi, e, dt);
  CHECK((psi - ref).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("joint Strang step matches the dense oracle") {
  AtomModel atom(SpaceGrid(10.0, 21), 2.0);
  FieldParams fp(0.8, 0.3);
  PulseEnvelope env(1, 1, 1, fp.omega);
  const double dt = 0.1, t = 2.0;
  const double tm = t + 0.5 * dt;
  for (FockBand band : {FockBand(0, 3), FockBand(2, 5)}) {
    const Eigen::MatrixXcd ha = joint_atomic(atom, band);
    const Eigen::MatrixXcd hi = joint_interaction(atom, band, fp, env(tm), tm);
    const Eigen::MatrixXcd u = cayley(ha, 0.5 * dt) * cayley(hi, dt) * cayley(ha, 0.5 * dt);

    Eigen::MatrixXcd c = random_state(21, band.count(), 7);
    const Eigen::VectorXcd ref = u * Eigen::Map<const Eigen::VectorXcd>(c.data(), c.size());
    FullqStepper stepper(atom, band, fp, env, dt, 1);
    stepper.step(c, t);
    const Eigen::Map<const Eigen::VectorXcd> got(c.data(), c.size());
    CHECK((got - ref).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("coherent-state expectation of the coupling is the classical field") {
  FieldParams fp(0.3, 0.02);
  PulseEnvelope env(2, 2, 2, fp.omega);
  const FockBand band(0, 120);
  const int nb = band.count();
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(nb, nb);
  for (int n = 1; n < nb; ++n) a(n - 1, n) = std::sqrt(double(n));
  for (cplx alpha : {cplx(3.0, 0.0), cplx(-1.2, 2.5), cplx(0.0, -4.0)}) {
    const Eigen::VectorXcd v = coherent_overlaps(alpha, band);
    for (double t : {3.0, 40.0, 71.3}) {
      const Eigen::MatrixXcd op =
          I * env(t) * fp.eps_v *
          (a * std::exp(-I * fp.omega * t) - a.adjoint() * std::exp(I * fp.omega * t));
      const cplx expect = v.dot(op * v);
      CHECK(std::abs(expect.imag()) < 1e-12);
      CHECK(std::abs(expect.real() - classical_field(t, alpha, fp, env)) < 1e-10);
    }
  }
}

TEST_CASE("classical propagation is time reversible") {
  AtomModel atom(SpaceGrid(40.0, 161), 2.0);
  FieldParams fp(0.5, 0.02);
  PulseEnvelope env(1, 1, 1, fp.omega);
  const GroundState g = ground_state(atom);
  const Schedule fwd = Schedule::covering(env, 0.1);
  const ElectronState out = propagate_classical(g.state, atom, cplx(1.5, 0.5), fp, env, fwd);
  const ElectronState back = propagate_classical(out, atom, cplx(1.5, 0.5), fp, env, fwd.reversed());
  CHECK((out.psi - g.state.psi).norm() > 1e-3);
  CHECK((back.psi - g.state.psi).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("zero amplitude leaves the ground state stationary") {
  AtomModel atom(SpaceGrid(40.0, 161), 2.0);
  FieldParams fp(0.5, 0.02);
  PulseEnvelope env(1, 1, 1, fp.omega);
  const GroundState g = ground_state(atom);
  const ElectronState out =
      propagate_classical(g.state, atom, cplx(0.0, 0.0), fp, env, Schedule::covering(env, 0.1));
  const cplx phase = g.state.psi.dot(out.psi) * atom.grid.dx();
  CHECK(std::abs(std::abs(phase) - 1.0) < 1e-10);
  CHECK((out.psi - phase * g.state.psi).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("opposite amplitudes give mirrored wavefunctions") {
  AtomModel atom(SpaceGrid(40.0, 161), 2.0);
  FieldParams fp(0.5, 0.02);
  PulseEnvelope env(1, 1, 1, fp.omega);
  const GroundState g = ground_state(atom);
  const Schedule sched = Schedule::covering(env, 0.1);
  const ElectronState a = propagate_classical(g.state, atom, cplx(2.0, 0.7), fp, env, sched);
  const ElectronState b = propagate_classical(g.state, atom, cplx(-2.0, -0.7), fp, env, sched);
  const Eigen::VectorXcd mirrored = b.psi.reverse();
  CHECK((a.psi - mirrored).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("joint propagation conserves norm and combined parity") {
  AtomModel atom(SpaceGrid(30.0, 121), 2.0);
  const FockBand band(0, 36);
  const FieldParams fp = derive_field_params(0.05, 0.6, 0.8);
  PulseEnvelope env(1, 2, 1, fp.omega);
  const GroundState g = ground_state(atom);
  JointState s = init_joint_state(g.state, squeezed_fock_coeffs(0.6, 0.0, band));
  const double n0 = s.norm();
  Schedule sched = Schedule::covering(env, 0.1, 5);
  Diagnostics diag;
  FullqOptions fo;
  fo.throw_on_edge = false;
  s = propagate_fullq(std::move(s), atom, fp, env, sched, &diag, fo);
  CHECK(std::abs(s.norm() - n0) < 1e-12);
  CHECK(diag.max_norm_drift < 1e-12);
  CHECK(diag.max_parity_leakage < 1e-14);
  CHECK(diag.records.size() == static_cast<std::size_t>(sched.n_steps / 5 + (sched.n_steps % 5 ? 2 : 1)));
}

TEST_CASE("joint propagation is second order in dt") {
  AtomModel atom(SpaceGrid(20.0, 81), 2.0);
  const FockBand band(0, 6);
  FieldParams fp(0.8, 0.15);
  PulseEnvelope env(1, 0, 1, fp.omega);
  const GroundState g = ground_state(atom);
  const JointState s0 = init_joint_state(g.state, coherent_fock_coeffs(cplx(0.5, 0.0), band, 1e-6));
  auto run = [&](int n) {
    FullqOptions fo;
    fo.throw_on_edge = false;
    return propagate_fullq(s0, atom, fp, env, Schedule{env.duration() / n, n, 0, 0.0}, nullptr, fo).c;
  };
  const Eigen::MatrixXcd ref = run(2560);
  const double e1 = (run(80) - ref).norm(), e2 = (run(160) - ref).norm(), e3 = (run(320) - ref).norm();
  const double p1 = std::log2(e1 / e2), p2 = std::log2(e2 / e3);
  CHECK(p1 == doctest::Approx(2.0).epsilon(0.1));
  CHECK(p2 == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("joint propagation is bitwise independent of the thread count") {
  AtomModel atom(SpaceGrid(30.0, 121), 2.0);
  const FockBand band(0, 30);
  const FieldParams fp = derive_field_params(0.05, 0.5, 0.8);
  PulseEnvelope env(1, 1, 1, fp.omega);
  const GroundState g = ground_state(atom);
  const JointState s0 = init_joint_state(g.state, squeezed_fock_coeffs(0.5, 0.0, band));
  FullqOptions one, many;
  one.threads = 1;
  many.threads = 3;
  one.throw_on_edge = many.throw_on_edge = false;
  const Schedule sched = Schedule::covering(env, 0.1);
  const JointState a = propagate_fullq(s0, atom, fp, env, sched, nullptr, one);
  const JointState b = propagate_fullq(s0, atom, fp, env, sched, nullptr, many);
  CHECK(a.c == b.c);
}

TEST_CASE("Fock-edge occupation") {
  SpaceGrid g(5.0, 11);
  JointState s{g, FockBand(0, 3), Eigen::MatrixXcd::Zero(11, 4), 0.0};
  s.c(5, 0) = 1.0;
  CHECK(edge_occupation(s) == 0.0);  // n = 0 is not a truncation edge
  s.c(5, 3) = 0.5;
  CHECK(edge_occupation(s) == doctest::Approx(0.25 * g.dx()));
  JointState t{g, FockBand(4, 7), s.c, 0.0};
  CHECK(edge_occupation(t) == doctest::Approx(1.25 * g.dx()));
}

TEST_CASE("band overflow raises a numerical error") {
  AtomModel atom(SpaceGrid(30.0, 121), 2.0);
  const FockBand band(0, 2);
  FieldParams fp(0.8, 0.5);
  PulseEnvelope env(1, 1, 1, fp.omega);
  const GroundState g = ground_state(atom);
  const JointState s0 = init_joint_state(g.state, fock_coeffs(0, band));
  try {
    propagate_fullq(s0, atom, fp, env, Schedule::covering(env, 0.1));
    FAIL("expected band-overflow");
  } catch (const Error& e) {
    CHECK(e.tag() == "band-overflow");
    CHECK(e.exit_code() == 3);
  }
}

}  // TEST_SUITE
