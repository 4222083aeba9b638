#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "qls/ensembles.hpp"
#include "qls/error.hpp"

using namespace qls;

namespace {

struct Small {
  AtomModel atom{SpaceGrid(30.0, 121), 2.0};
  FockBand band{0, 30};
  FieldParams fp = derive_field_params(0.05, 0.5, 0.8);
  PulseEnvelope env{1, 1, 1, 0.8};
  Schedule sched = Schedule::covering(env, 0.2);
  GroundState g = ground_state(atom);
  PhotonSpec photon = PhotonSpec::squeezed_vacuum(0.5);
  AlphaQuadrature quad = build_alpha_quadrature(band, 40, 62);
  EnergyGrid egrid{0.0, 2.0, 41};
};

}  // namespace

TEST_SUITE("ensembles") {

TEST_CASE("a single coherent node reproduces the classical spectrum") {
  Small s;
  const cplx alpha(1.2, 0.3);
  const PhotonSpec coh = PhotonSpec::coherent(alpha);
  const SpectrumEngine engine(s.atom, s.egrid, 8);
  EnsembleOptions opts;
  opts.spectra = &engine;
  EnsembleRun run = run_ensemble(s.g.state, s.atom, s.fp, s.env, s.sched, coh,
                                 single_node_quadrature(alpha, 1.0), opts);
  const Eigen::VectorXd ref =
      pes(propagate_classical(s.g.state, s.atom, alpha, s.fp, s.env, s.sched), s.atom, s.egrid);
  CHECK((qrep_total_pes(run) - ref).cwiseAbs().maxCoeff() <= 1e-14 * ref.maxCoeff());
}

TEST_CASE("R-representation without a field returns the initial photon state") {
  Small s;
  const FieldParams quiet(0.8, 1e-12);
  const EnsembleRun run = run_ensemble(s.g.state, s.atom, quiet, s.env, s.sched, s.photon, s.quad);
  const Eigen::VectorXd p = rrep_photon_dist(run, s.band);
  const Eigen::VectorXd ref = squeezed_fock_coeffs(0.5, 0.0, s.band).probabilities();
  CHECK((p - ref).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("parity saver mirrors partner nodes") {
  Small s;
  EnsembleOptions on, off;
  off.parity_saver = false;
  const EnsembleRun a = run_ensemble(s.g.state, s.atom, s.fp, s.env, s.sched, s.photon, s.quad, on);
  const EnsembleRun b = run_ensemble(s.g.state, s.atom, s.fp, s.env, s.sched, s.photon, s.quad, off);
  CHECK(2 * a.propagated_count() <= s.quad.size());
  CHECK(b.propagated_count() > a.propagated_count());
  const Eigen::VectorXd pa = rrep_photon_dist(a, s.band), pb = rrep_photon_dist(b, s.band);
  CHECK((pa - pb).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("results are bitwise independent of dispatch order and thread count") {
  Small s;
  const SpectrumEngine engine(s.atom, s.egrid, 8);
  EnsembleOptions base;
  base.spectra = &engine;
  base.threads = 1;
  const EnsembleRun ref = run_ensemble(s.g.state, s.atom, s.fp, s.env, s.sched, s.photon, s.quad, base);

  EnsembleOptions shuffled = base;
  shuffled.threads = 3;
  shuffled.dispatch_order.resize(ref.propagated_count());
  std::iota(shuffled.dispatch_order.begin(), shuffled.dispatch_order.end(), std::size_t{0});
  std::shuffle(shuffled.dispatch_order.begin(), shuffled.dispatch_order.end(), std::mt19937(4));
  EnsembleRun other = run_ensemble(s.g.state, s.atom, s.fp, s.env, s.sched, s.photon, s.quad, shuffled);

  CHECK(other.states == ref.states);
  CHECK(other.node_pes == ref.node_pes);
  EnsembleRun ref_copy = ref;
  CHECK(qrep_total_pes(other) == qrep_total_pes(ref_copy));
  CHECK(rrep_photon_dist(other, s.band) == rrep_photon_dist(ref, s.band));
}

TEST_CASE("dropping the coherences gives the Q-representation") {
  Small s;
  const SpectrumEngine engine(s.atom, s.egrid, 8);
  EnsembleOptions opts;
  opts.spectra = &engine;
  const EnsembleRun run = run_ensemble(s.g.state, s.atom, s.fp, s.env, s.sched, s.photon, s.quad, opts);
  const DiagonalTruncation d = diagonal_truncation(run, s.band);
  CHECK((d.photon_dist - qrep_photon_dist(run, s.band)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((d.joint - qrep_joint(run, s.band)).cwiseAbs().maxCoeff() < 1e-15);
  // The Q distribution never sees the electron.
  CHECK(qrep_photon_dist(run, s.band) == qrep_photon_dist(s.photon, s.quad, s.band));
}

TEST_CASE("memory-saving mode needs spectra") {
  Small s;
  EnsembleOptions opts;
  opts.keep_states = false;
  CHECK_THROWS_AS(run_ensemble(s.g.state, s.atom, s.fp, s.env, s.sched, s.photon, s.quad, opts), Error);
}

TEST_CASE("screening skips nodes with negligible weight") {
  Small s;
  EnsembleOptions opts;
  opts.screen_tol = 1e-3;
  const EnsembleRun run = run_ensemble(s.g.state, s.atom, s.fp, s.env, s.sched, s.photon, s.quad, opts);
  const auto screened = std::count(run.status.begin(), run.status.end(), NodeStatus::Screened);
  CHECK(screened > 0);
  for (std::size_t j = 0; j < run.status.size(); ++j)
    if (run.status[j] == NodeStatus::Screened) CHECK(run.final_state(j).norm() == 0.0);
}

}  // TEST_SUITE
