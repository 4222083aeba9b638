#pragma once

// Subcommand bodies shared by the CLI and the acceptance suite. Each run
// returns a self-describing container; nothing here touches the filesystem.

#include <string>
#include <vector>

#include "qls/ensembles.hpp"
#include "qls/io/config.hpp"
#include "qls/io/container.hpp"

namespace qls {

struct Setup {
  RunConfig cfg;
  AtomModel atom;
  FieldParams fp;
  PulseEnvelope env;
  Schedule sched;
  PhotonSpec photon;
  EnergyGrid egrid;
  GroundState ground;
  int threads = 0;
};

// threads <= 0: default_threads().
Setup make_setup(const RunConfig& cfg, int threads = 0);

// Extra knobs not carried by the config.
struct RunOptions {
  int record_every = 10;  // diagnostics cadence in steps (fullq)
  std::vector<std::size_t> dispatch_order;  // ensemble task permutation
  bool keep_ensemble = false;  // R-rep/Q-rep: also return the EnsembleRun
};

struct EnsembleResult {
  Container container;
  EnsembleRun run;  // filled only with RunOptions::keep_ensemble
};

Container run_ground_state(const Setup& s);
// Joint propagation; arrays energies, pes, joint, photon_dist, photon_dist_initial,
// cutoff lines and the diagnostics trace.
Container run_full(const Setup& s, const RunOptions& opts = {});
// Q-representation; arrays energies, pes, joint, photon_dist, photon_dist_initial.
EnsembleResult run_qrep(const Setup& s, const RunOptions& opts = {});
// R-representation; arrays energies, pes, joint, photon_dist.
EnsembleResult run_rrep(const Setup& s, const RunOptions& opts = {});
// Classical TDSE for one drive amplitude: alpha for a coherent state,
// sinh(r) for squeezed vacuum, sqrt(n) for a Fock state.
Container run_spectrum(const Setup& s);
cplx equivalent_alpha(const PhotonSpec& photon);
// Initial photon distribution and its Q-representation counterpart.
Container run_photon_dist(const Setup& s);
// Throws quadrature-insufficient naming the worst (m, n).
Container run_quadrature_check(const Setup& s);

// One observable per level, successive deltas and the fitted order
// log(d_k / d_{k+1}) / log(h_k / h_{k+1}) averaged over the levels.
//   dt         classical final state, deltas ||psi_k - psi_{k+1}||
//   nx         classical PES, deltas normalized L1
//   band       fullq maximum Fock-edge occupation (levels are n_max)
//   quadrature identity-check error (levels are n_angular)
Container run_converge(const RunConfig& cfg, const std::string& axis,
                       const std::vector<double>& levels, int threads = 0);

}  // namespace qls
